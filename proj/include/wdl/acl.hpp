#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wdl/core.hpp"

namespace wdl {

/// Owner implies Read and Write in privilege checks.
enum class Privilege { Read, Write, Owner };

struct Grant {
    RelationKey target;
    Name grantee;
    Privilege privilege = Privilege::Read;
    SourcePos pos;

    auto operator<=>(const Grant&) const = default;
};

const char* to_string(Privilege p);
std::optional<Privilege> parse_privilege(const std::string& text);

/// Relation-level privileges of every peer.
///
/// The grants are held as the tuples of the reserved extensional relation
/// `acl@peer(relationName, granteeName, privilegeName)`; `facts()` hands out
/// exactly those tuples, so there is no second copy to drift out of sync.
/// Declaring a relation records its owner's Owner grant.
class AclStore {
public:
    /// Registers a relation and its owner grant. Redeclaring is a no-op.
    void declare(const RelationDecl& decl);

    /// Adds `g` on behalf of `grantor`. Throws NotOwner / UnknownRelation.
    void grant(const Grant& g, const Name& grantor);
    /// Removes `g`; missing grants are ignored. Throws NotOwner /
    /// CannotRevokeOwner / UnknownRelation.
    void revoke(const Grant& g, const Name& grantor);

    bool has_privilege(const Name& who, const RelationKey& target, Privilege p) const;

    bool declared(const RelationKey& target) const { return decls_.contains(target); }
    const RelationDecl& decl(const RelationKey& target) const;
    const DeclTable& decls() const { return decls_; }

    /// Tuples of `acl@peer`, sorted.
    std::vector<Fact> facts(const Name& peer) const;
    /// All grants at `peer`, sorted.
    std::vector<Grant> grants(const Name& peer) const;

    bool operator==(const AclStore&) const = default;

private:
    DeclTable decls_;
    std::map<Name, std::set<Args>> tuples_;  // peer -> acl tuples
};

AclStore grant(AclStore store, const Grant& g, const Name& grantor);
AclStore revoke(AclStore store, const Grant& g, const Name& grantor);
bool has_privilege(const AclStore& store, const Name& who, const RelationKey& target, Privilege p);

}  // namespace wdl
