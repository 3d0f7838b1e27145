#include "wdl/netsim.hpp"

#include <algorithm>
#include <sstream>

namespace wdl {

bool World::same_state(const World& other) const {
    return principals == other.principals && peers == other.peers && acl == other.acl &&
           acl_tokens == other.acl_tokens && in_flight == other.in_flight && next_token == other.next_token;
}

World build_world(const Program& program) {
    validate(program);
    World world;
    for (const auto& p : program.principals) world.principals[p.name] = p.kind;

    for (const auto& [key, decl] : declarations_of(program)) world.acl.declare(decl);
    // Grants are configuration and are issued by the relation owner.
    for (const auto& g : program.grants) world.acl.grant(g, world.acl.decl(g.target).owner);

    for (const auto& [name, kind] : world.principals) {
        if (kind == PrincipalKind::Peer) world.peers[name].id = name;
    }
    for (const auto& r : program.rules) world.peers[r.host].installed.push_back(r);
    for (auto& [_, peer] : world.peers) {
        auto& rules = peer.installed;
        std::sort(rules.begin(), rules.end(), [](const Rule& a, const Rule& b) {
            return std::make_pair(a.author, to_string(a)) < std::make_pair(b.author, to_string(b));
        });
        rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
    }

    TokenCounter tokens(world.next_token);
    std::map<FactKey, Fact> initial;
    for (const auto& f : program.facts) initial.try_emplace(f.key(), f);
    for (auto& [key, f] : initial) {
        f.token = tokens.fresh();
        f.pos = {};
        world.peers[key.ref.peer].carry.emplace(key, f);
    }
    for (const auto& [name, _] : world.peers) {
        for (const auto& f : world.acl.facts(name)) world.acl_tokens[f.key()] = tokens.fresh();
    }
    world.next_token = tokens.peek();
    return world;
}

namespace {

void sort_lines(std::vector<std::string>& v) { std::sort(v.begin(), v.end()); }

}  // namespace

RoundTrace step_world(World& world) {
    RoundTrace trace;
    trace.round = world.round + 1;

    std::map<Name, Mailbox> inboxes;
    for (const auto& m : world.in_flight.messages) inboxes[m.to()].messages.push_back(m);
    for (const auto& d : world.in_flight.delegations) inboxes[d.to()].delegations.push_back(d);

    TokenCounter tokens(world.next_token);
    RoundContext ctx{world.acl, &world.acl_tokens, &tokens, &trace.rejected};

    // Every peer reads only its own previous state and its inbox; results are
    // merged after all peers have stepped.
    std::map<Name, PeerState> next;
    Mailbox outbox;
    for (const auto& [name, state] : world.peers) {
        Mailbox inbox = inboxes[name];
        inbox.sort();
        StepResult r = step(state, inbox, ctx);
        for (auto& m : r.outbox.messages) outbox.messages.push_back(std::move(m));
        for (auto& d : r.outbox.delegations) outbox.delegations.push_back(std::move(d));
        next.emplace(name, std::move(r.next));
    }
    std::erase_if(outbox.delegations, [&](const DelegationMsg& d) {
        if (world.peers.contains(d.to())) return false;
        trace.rejected.push_back(d.from + ": unknown peer: " + d.serialize());
        return true;
    });
    outbox.sort();

    for (const auto& m : outbox.messages) trace.messages.push_back(m.serialize());
    for (const auto& d : outbox.delegations) trace.delegations.push_back(d.serialize());
    for (const auto& [_, peer] : next) {
        for (const auto& [key, f] : peer.edb) trace.edb.push_back(describe_fact(f, base_provenance(f)));
        for (const auto& [key, d] : peer.idb) trace.idb.push_back(describe_fact(d.fact, d.prov));
    }
    sort_lines(trace.messages);
    sort_lines(trace.delegations);
    sort_lines(trace.edb);
    sort_lines(trace.idb);
    sort_lines(trace.rejected);

    world.peers = std::move(next);
    world.in_flight = std::move(outbox);
    world.next_token = tokens.peek();
    ++world.round;
    return trace;
}

RunResult run(World world, int rounds) {
    RunResult result;
    for (int i = 0; i < rounds; ++i) result.trace.rounds.push_back(step_world(world));
    result.world = std::move(world);
    return result;
}

RunResult run_until_quiescent(World world, int max_rounds) {
    RunResult result;
    for (int i = 0; i < max_rounds; ++i) {
        World before = world;
        result.trace.rounds.push_back(step_world(world));
        if (world.same_state(before)) {
            result.quiescent = true;
            break;
        }
    }
    result.world = std::move(world);
    return result;
}

std::string Trace::render(long seed) const {
    std::ostringstream os;
    os << "seed " << seed << '\n';
    auto section = [&](const char* name, const std::vector<std::string>& lines) {
        os << name << '\n';
        for (const auto& l : lines) os << "  " << l << '\n';
    };
    for (const auto& r : rounds) {
        os << "round " << r.round << '\n';
        section("messages", r.messages);
        section("delegations", r.delegations);
        section("edb", r.edb);
        section("idb", r.idb);
        section("rejected", r.rejected);
    }
    return os.str();
}

namespace {

bool matches(const Atom& pattern, const Args& args) {
    if (pattern.args.size() != args.size()) return false;
    Binding b;
    for (std::size_t i = 0; i < args.size(); ++i) {
        const Term& t = pattern.args[i];
        if (!t.is_variable()) {
            if (t.text != args[i]) return false;
            continue;
        }
        auto [it, inserted] = b.emplace(t.text, args[i]);
        if (!inserted && it->second != args[i]) return false;
    }
    return true;
}

}  // namespace

std::vector<Fact> query(const World& world, const Name& who, const Atom& pattern) {
    auto key = pattern.ref.key();
    if (!key) throw ValidationError("query pattern must name a ground relation", pattern.pos);
    if (!world.acl.declared(*key)) throw UnknownRelation(to_string(*key), pattern.pos);
    if (!world.principals.contains(who)) throw UnknownPrincipal(who, pattern.pos);

    std::vector<Fact> out;
    const PeerState& peer = world.peers.at(key->peer);
    if (key->relation == kAclRelation) {
        for (Fact f : world.acl.facts(key->peer)) {
            f.token = world.acl_tokens.at(f.key());
            if (matches(pattern, f.args) && can_read(who, f, base_provenance(f), world.acl)) out.push_back(f);
        }
        return out;
    }
    for (const auto& [k, f] : peer.edb) {
        if (k.ref == *key && matches(pattern, k.args) && can_read(who, f, base_provenance(f), world.acl)) {
            out.push_back(f);
        }
    }
    for (const auto& [k, d] : peer.idb) {
        if (k.ref == *key && matches(pattern, k.args) && can_read(who, d.fact, d.prov, world.acl)) {
            out.push_back(d.fact);
        }
    }
    return out;
}

std::optional<Provenance> provenance_of(const World& world, const FactKey& key) {
    auto p = world.peers.find(key.ref.peer);
    if (p == world.peers.end()) return std::nullopt;
    if (auto it = p->second.edb.find(key); it != p->second.edb.end()) return base_provenance(it->second);
    if (auto it = p->second.idb.find(key); it != p->second.idb.end()) return it->second.prov;
    return std::nullopt;
}

}  // namespace wdl
