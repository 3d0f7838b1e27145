#include "wdl/acl.hpp"

namespace wdl {

const char* to_string(Privilege p) {
    switch (p) {
        case Privilege::Read: return "read";
        case Privilege::Write: return "write";
        case Privilege::Owner: return "owner";
    }
    return "?";
}

std::optional<Privilege> parse_privilege(const std::string& text) {
    if (text == "read") return Privilege::Read;
    if (text == "write") return Privilege::Write;
    if (text == "owner") return Privilege::Owner;
    return std::nullopt;
}

namespace {

Args tuple_of(const Grant& g) { return {g.target.relation, g.grantee, to_string(g.privilege)}; }

}  // namespace

void AclStore::declare(const RelationDecl& decl) {
    if (decls_.contains(decl.ref)) return;
    decls_.emplace(decl.ref, decl);
    tuples_[decl.ref.peer].insert(tuple_of({decl.ref, decl.owner, Privilege::Owner, {}}));
}

const RelationDecl& AclStore::decl(const RelationKey& target) const {
    auto it = decls_.find(target);
    if (it == decls_.end()) throw UnknownRelation(to_string(target));
    return it->second;
}

void AclStore::grant(const Grant& g, const Name& grantor) {
    decl(g.target);
    if (!has_privilege(grantor, g.target, Privilege::Owner)) {
        throw NotOwner(grantor, to_string(g.target));
    }
    tuples_[g.target.peer].insert(tuple_of(g));
}

void AclStore::revoke(const Grant& g, const Name& grantor) {
    const auto& d = decl(g.target);
    if (!has_privilege(grantor, g.target, Privilege::Owner)) {
        throw NotOwner(grantor, to_string(g.target));
    }
    if (g.privilege == Privilege::Owner && g.grantee == d.owner) {
        throw CannotRevokeOwner(to_string(g.target));
    }
    auto it = tuples_.find(g.target.peer);
    if (it != tuples_.end()) it->second.erase(tuple_of(g));
}

bool AclStore::has_privilege(const Name& who, const RelationKey& target, Privilege p) const {
    decl(target);
    // A peer always reads and writes its own storage.
    if (who == target.peer) return true;
    auto it = tuples_.find(target.peer);
    if (it == tuples_.end()) return false;
    const auto& tuples = it->second;
    if (tuples.contains({target.relation, who, to_string(Privilege::Owner)})) return true;
    return p != Privilege::Owner && tuples.contains({target.relation, who, to_string(p)});
}

std::vector<Fact> AclStore::facts(const Name& peer) const {
    std::vector<Fact> out;
    auto it = tuples_.find(peer);
    if (it == tuples_.end()) return out;
    for (const auto& t : it->second) {
        out.push_back(Fact{{kAclRelation, peer}, t, std::nullopt, peer, {}});
    }
    return out;
}

std::vector<Grant> AclStore::grants(const Name& peer) const {
    std::vector<Grant> out;
    auto it = tuples_.find(peer);
    if (it == tuples_.end()) return out;
    for (const auto& t : it->second) {
        out.push_back(Grant{{t[0], peer}, t[1], *parse_privilege(t[2]), {}});
    }
    return out;
}

AclStore grant(AclStore store, const Grant& g, const Name& grantor) {
    store.grant(g, grantor);
    return store;
}

AclStore revoke(AclStore store, const Grant& g, const Name& grantor) {
    store.revoke(g, grantor);
    return store;
}

bool has_privilege(const AclStore& store, const Name& who, const RelationKey& target, Privilege p) {
    return store.has_privilege(who, target, p);
}

}  // namespace wdl
