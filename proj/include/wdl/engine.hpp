#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wdl/acl.hpp"
#include "wdl/core.hpp"
#include "wdl/provenance.hpp"

namespace wdl {

/// A fact together with the derivations that support it.
struct Derived {
    Fact fact;
    Provenance prov;

    bool operator==(const Derived&) const = default;
};

using IdbMap = std::map<FactKey, Derived>;

/// A fact sent to another peer. Extensional targets arrive as plain facts and
/// receive a fresh token at the receiver. Intentional targets (remote view
/// definitions) keep their provenance.
struct Message {
    Name from;
    Name author;
    Fact fact;
    std::optional<Provenance> provenance;  // set iff the target is intentional

    Name to() const { return fact.ref.peer; }
    std::string serialize() const;

    bool operator==(const Message&) const = default;
};

/// A residual rule installed at `residual.host` on behalf of `author`.
/// `carried` is the provenance of the bindings already made by the sender.
struct DelegationMsg {
    Name from;
    Name author;
    Rule residual;
    Provenance carried = Provenance::unit();

    Name to() const { return residual.host; }
    std::string serialize() const;

    bool operator==(const DelegationMsg&) const = default;
};

/// Items travelling between peers, kept sorted by (sender, content).
struct Mailbox {
    std::vector<Message> messages;
    std::vector<DelegationMsg> delegations;

    void sort();
    bool empty() const { return messages.empty() && delegations.empty(); }

    bool operator==(const Mailbox&) const = default;
};

struct PeerState {
    Name id;
    std::vector<Rule> installed;
    std::vector<DelegationMsg> delegated_in;  // replaced wholesale every round
    std::map<FactKey, Fact> edb;              // extensional facts of the last evaluated round
    IdbMap contributions;                     // remote view facts received this round
    IdbMap idb;                               // intentional facts of the last evaluated round
    std::map<FactKey, Fact> carry;            // extensional facts opening the next round

    bool operator==(const PeerState&) const = default;
};

class TokenCounter {
public:
    explicit TokenCounter(TokenId next = 1) : next_(next) {}
    TokenId fresh() { return next_++; }
    TokenId peek() const { return next_; }

private:
    TokenId next_;
};

/// Everything a peer may consult besides its own state.
struct RoundContext {
    const AclStore& acl;
    /// Tokens of `acl@peer` tuples. Without them the acl relation is not
    /// visible to rule bodies.
    const std::map<FactKey, TokenId>* acl_tokens = nullptr;
    TokenCounter* tokens = nullptr;
    std::vector<std::string>* log = nullptr;

    void reject(const std::string& line) const {
        if (log) log->push_back(line);
    }
};

/// Facts a rule body can match at one peer, with their provenance.
using View = std::map<RelationKey, std::map<Args, Derived>>;

View make_view(const Name& peer, const std::map<FactKey, Fact>& edb, const IdbMap& idb, const RoundContext& ctx);

/// Least fixpoint of the rules with a local intentional head, seeded by the
/// received view contributions. Each rule reads only what its author can read.
IdbMap local_fixpoint(const PeerState& state, const RoundContext& ctx);

/// Evaluates the maximal local prefix of an installed rule and returns one
/// residual per satisfying binding, addressed to the peer of the first
/// non-local atom. Throws UnboundDelegationTarget when that peer is a variable
/// the prefix did not bind.
std::vector<DelegationMsg> split_for_delegation(const Rule& rule, const Name& host, const PeerState& state,
                                                const RoundContext& ctx);

/// Runs a delegated rule over the host's current facts with the delegator's
/// privileges. Facts the delegator cannot read never match; every result is
/// authored by the delegator.
std::vector<Derived> evaluate_sandboxed(const DelegationMsg& delegation, const PeerState& state,
                                        const RoundContext& ctx);

/// Same rule, same facts, no reader restriction.
std::vector<Derived> evaluate_unrestricted(const Rule& rule, const View& view,
                                           const Provenance& carried = Provenance::unit());

struct StepResult {
    PeerState next;
    Mailbox outbox;
};

/// One round at one peer. `inbox` must be sorted.
StepResult step(const PeerState& state, const Mailbox& inbox, const RoundContext& ctx);

std::string describe_fact(const Fact& fact, const Provenance& prov);

}  // namespace wdl
