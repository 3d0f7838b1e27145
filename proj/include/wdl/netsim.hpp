#pragma once

#include <map>
#include <string>
#include <vector>

#include "wdl/acl.hpp"
#include "wdl/engine.hpp"
#include "wdl/parser.hpp"

namespace wdl {

struct World {
    std::map<Name, PrincipalKind> principals;
    std::map<Name, PeerState> peers;
    AclStore acl;
    std::map<FactKey, TokenId> acl_tokens;
    Mailbox in_flight;  // sent last round, delivered next round
    int round = 0;
    TokenId next_token = 1;

    bool operator==(const World&) const = default;

    /// Equality ignoring the round counter.
    bool same_state(const World& other) const;
};

/// Sets up peers, grants and tokens. Peers, rules and initial facts are
/// ordered canonically so that declaration order never shows in a run.
World build_world(const Program& program);

/// Record of one round, each section sorted.
struct RoundTrace {
    int round = 0;
    std::vector<std::string> messages;
    std::vector<std::string> delegations;
    std::vector<std::string> edb;
    std::vector<std::string> idb;
    std::vector<std::string> rejected;
};

struct Trace {
    std::vector<RoundTrace> rounds;

    std::string render(long seed = 0) const;
};

/// Advances every peer by one round against the same snapshot.
RoundTrace step_world(World& world);

struct RunResult {
    World world;
    Trace trace;
    bool quiescent = false;  // only meaningful for run_until_quiescent
};

RunResult run(World world, int rounds);

/// Runs until a round leaves the world unchanged, or `max_rounds` is reached.
RunResult run_until_quiescent(World world, int max_rounds = 1000);

/// Facts of `pattern`'s relation that match it and that `who` may read, sorted.
/// Throws UnknownRelation, UnknownPrincipal, or ValidationError for a
/// non-ground relation.
std::vector<Fact> query(const World& world, const Name& who, const Atom& pattern);

/// Provenance of a fact currently held by the world, if any.
std::optional<Provenance> provenance_of(const World& world, const FactKey& key);

}  // namespace wdl
