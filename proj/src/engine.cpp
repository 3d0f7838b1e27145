#include "wdl/engine.hpp"

#include <algorithm>
#include <cassert>

namespace wdl {

std::string describe_fact(const Fact& fact, const Provenance& prov) {
    return "fact " + to_string(fact.key()) + " prov=" + to_string(prov);
}

std::string Message::serialize() const {
    std::string out = (provenance ? "view " : "message ") + from + " -> " + to() + " by " + author + ": " +
                      to_string(fact.key());
    if (provenance) out += " prov=" + to_string(*provenance);
    return out;
}

std::string DelegationMsg::serialize() const {
    return "delegation " + from + " -> " + to() + " by " + author + ": " + to_string(residual) +
           " prov=" + to_string(carried);
}

void Mailbox::sort() {
    auto by_sender = [](const auto& a, const auto& b) {
        if (a.from != b.from) return a.from < b.from;
        return a.serialize() < b.serialize();
    };
    std::sort(messages.begin(), messages.end(), by_sender);
    std::sort(delegations.begin(), delegations.end(), by_sender);
}

View make_view(const Name& peer, const std::map<FactKey, Fact>& edb, const IdbMap& idb, const RoundContext& ctx) {
    View view;
    for (const auto& [key, fact] : edb) view[key.ref].emplace(key.args, Derived{fact, base_provenance(fact)});
    for (const auto& [key, d] : idb) view[key.ref].emplace(key.args, d);
    if (ctx.acl_tokens) {
        for (Fact f : ctx.acl.facts(peer)) {
            auto it = ctx.acl_tokens->find(f.key());
            if (it == ctx.acl_tokens->end()) continue;
            f.token = it->second;
            Provenance p = base_provenance(f);
            view[f.ref].emplace(f.args, Derived{std::move(f), std::move(p)});
        }
    }
    return view;
}

namespace {

struct Stop {
    Binding binding;
    Provenance prov;
    std::size_t atom;
    Name target;
};

struct Walk {
    std::vector<std::pair<Binding, Provenance>> complete;
    std::vector<Stop> remote;
    std::vector<std::string> unbound;
};

bool unify(const Term& pattern, const std::string& value, Binding& b) {
    if (!pattern.is_variable()) return pattern.text == value;
    auto [it, inserted] = b.emplace(pattern.text, value);
    return inserted || it->second == value;
}

/// Enumerates bindings of a rule body left to right at `host`. Enumeration of
/// a binding stops at the first atom located elsewhere.
class Walker {
public:
    Walker(const Rule& rule, const Name& host, const View& view, const AclStore* acl, const Name* reader)
        : rule_(rule), host_(host), view_(view), acl_(acl), reader_(reader) {}

    Walk run(const Provenance& carried) {
        Binding b;
        visit(0, b, carried);
        return std::move(out_);
    }

private:
    void visit(std::size_t i, const Binding& b, const Provenance& prov) {
        if (i == rule_.body.size()) {
            out_.complete.emplace_back(b, prov);
            return;
        }
        const Atom atom = substitute(rule_.body[i], b);
        if (atom.ref.peer.is_variable()) {
            out_.unbound.push_back(to_string(atom));
            return;
        }
        if (atom.ref.peer.text != host_) {
            out_.remote.push_back({b, prov, i, atom.ref.peer.text});
            return;
        }
        if (!atom.ref.relation.is_variable()) {
            auto it = view_.find(*atom.ref.key());
            if (it != view_.end()) match(i, atom, it->second, b, prov);
            return;
        }
        for (const auto& [key, facts] : view_) {
            if (key.peer != host_) continue;
            Binding nb = b;
            if (!unify(atom.ref.relation, key.relation, nb)) continue;
            match(i, substitute(atom, nb), facts, nb, prov);
        }
    }

    void match(std::size_t i, const Atom& atom, const std::map<Args, Derived>& facts, const Binding& b,
               const Provenance& prov) {
        for (const auto& [args, d] : facts) {
            if (args.size() != atom.args.size()) continue;
            Binding nb = b;
            bool ok = true;
            for (std::size_t k = 0; ok && k < args.size(); ++k) ok = unify(atom.args[k], args[k], nb);
            if (!ok) continue;
            if (reader_ && !can_read(*reader_, d.fact, d.prov, *acl_)) continue;
            visit(i + 1, nb, atom.hidden ? prov : combine(prov, d.prov));
        }
    }

    const Rule& rule_;
    const Name& host_;
    const View& view_;
    const AclStore* acl_;
    const Name* reader_;
    Walk out_;
};

Fact head_fact(const Rule& rule, const Binding& b) {
    Atom head = substitute(rule.head, b);
    Fact f;
    f.ref = *head.ref.key();
    for (const auto& t : head.args) f.args.push_back(t.text);
    f.author = rule.author;
    return f;
}

void merge_into(IdbMap& into, Derived d) {
    auto key = d.fact.key();
    auto it = into.find(key);
    if (it == into.end()) {
        into.emplace(std::move(key), std::move(d));
    } else {
        it->second.prov = merge_alternatives(it->second.prov, d.prov);
    }
}

bool head_is_static(const Rule& rule) { return rule.head.ref.ground(); }

/// Ground head at `host` naming an intentional relation: evaluated inside the fixpoint.
bool feeds_fixpoint(const Rule& rule, const Name& host, const AclStore& acl) {
    if (!head_is_static(rule) || rule.head.ref.peer.text != host) return false;
    auto key = *rule.head.ref.key();
    return acl.declared(key) && acl.decl(key).kind == RelationKind::Intentional;
}

struct Task {
    const Rule* rule;
    Provenance carried;
};

std::vector<Task> tasks_of(const PeerState& state) {
    std::vector<Task> tasks;
    for (const auto& r : state.installed) tasks.push_back({&r, Provenance::unit()});
    for (const auto& d : state.delegated_in) tasks.push_back({&d.residual, d.carried});
    return tasks;
}

const size_t kMaxFixpointIterations = 10000;

}  // namespace

IdbMap local_fixpoint(const PeerState& state, const RoundContext& ctx) {
    std::vector<Task> tasks;
    for (auto& t : tasks_of(state)) {
        if (!feeds_fixpoint(*t.rule, state.id, ctx.acl)) continue;
        if (!ctx.acl.has_privilege(t.rule->author, *t.rule->head.ref.key(), Privilege::Write)) {
            ctx.reject(state.id + ": write denied for " + t.rule->author + " on " +
                       to_string(*t.rule->head.ref.key()) + ": " + to_string(*t.rule));
            continue;
        }
        tasks.push_back(std::move(t));
    }

    IdbMap idb = state.contributions;
    for (std::size_t iter = 0; iter < kMaxFixpointIterations; ++iter) {
        const View view = make_view(state.id, state.edb, idb, ctx);
        IdbMap next = idb;
        for (const auto& t : tasks) {
            Walk w = Walker(*t.rule, state.id, view, &ctx.acl, &t.rule->author).run(t.carried);
            for (auto& [b, prov] : w.complete) merge_into(next, Derived{head_fact(*t.rule, b), prov});
        }
        if (next == idb) {
            for (const auto& [key, d] : idb) {
                if (d.prov.truncated) ctx.reject(state.id + ": provenance cap reached: " + describe_fact(d.fact, d.prov));
            }
            return idb;
        }
        idb = std::move(next);
    }
    ctx.reject(state.id + ": fixpoint iteration limit reached");
    return idb;
}

namespace {

Rule residual_of(const Rule& rule, const Stop& stop) {
    Rule r;
    r.head = substitute(rule.head, stop.binding);
    for (std::size_t i = stop.atom; i < rule.body.size(); ++i) r.body.push_back(substitute(rule.body[i], stop.binding));
    r.host = stop.target;
    r.author = rule.author;
    r.delegated_by = rule.author;
    return r;
}

void collect_delegations(const Rule& rule, const Name& host, const Walk& w, std::map<std::string, DelegationMsg>& out) {
    for (const auto& stop : w.remote) {
        DelegationMsg msg{host, rule.author, residual_of(rule, stop), stop.prov};
        std::string key = to_string(msg.residual) + "|" + msg.to() + "|" + msg.author;
        auto it = out.find(key);
        if (it == out.end()) {
            out.emplace(std::move(key), std::move(msg));
        } else {
            it->second.carried = merge_alternatives(it->second.carried, msg.carried);
        }
    }
}

}  // namespace

std::vector<DelegationMsg> split_for_delegation(const Rule& rule, const Name& host, const PeerState& state,
                                                const RoundContext& ctx) {
    const View view = make_view(host, state.edb, state.idb, ctx);
    Walk w = Walker(rule, host, view, &ctx.acl, &rule.author).run(Provenance::unit());
    if (!w.unbound.empty()) throw UnboundDelegationTarget(w.unbound.front());
    std::map<std::string, DelegationMsg> out;
    collect_delegations(rule, host, w, out);
    std::vector<DelegationMsg> result;
    for (auto& [_, m] : out) result.push_back(std::move(m));
    return result;
}

namespace {

std::vector<Derived> complete(const Rule& rule, const Walk& w) {
    IdbMap facts;
    for (const auto& [b, prov] : w.complete) merge_into(facts, Derived{head_fact(rule, b), prov});
    std::vector<Derived> out;
    for (auto& [_, d] : facts) out.push_back(std::move(d));
    return out;
}

}  // namespace

std::vector<Derived> evaluate_sandboxed(const DelegationMsg& delegation, const PeerState& state,
                                        const RoundContext& ctx) {
    const View view = make_view(state.id, state.edb, state.idb, ctx);
    const Rule& rule = delegation.residual;
    const Name& reader = rule.delegated_by ? *rule.delegated_by : rule.author;
    auto out = complete(rule, Walker(rule, state.id, view, &ctx.acl, &reader).run(delegation.carried));
    for (auto& d : out) d.fact.author = reader;
    return out;
}

std::vector<Derived> evaluate_unrestricted(const Rule& rule, const View& view, const Provenance& carried) {
    return complete(rule, Walker(rule, rule.host, view, nullptr, nullptr).run(carried));
}

StepResult step(const PeerState& state, const Mailbox& inbox, const RoundContext& ctx) {
    assert(ctx.tokens);
    const Name& self = state.id;
    PeerState next;
    next.id = self;
    next.installed = state.installed;
    next.edb = state.carry;

    // A fact present in the round it is re-created from keeps its token.
    auto token_from = [&](const std::map<FactKey, Fact>& previous, const FactKey& key) {
        auto it = previous.find(key);
        return it != previous.end() && it->second.token ? *it->second.token : ctx.tokens->fresh();
    };

    // (1) incoming facts
    for (const auto& m : inbox.messages) {
        const RelationKey& ref = m.fact.ref;
        std::string what = m.serialize();
        if (ref.peer != self || !ctx.acl.declared(ref) || ref.relation == kAclRelation) {
            ctx.reject(self + ": unknown relation: " + what);
            continue;
        }
        const RelationDecl& decl = ctx.acl.decl(ref);
        if (decl.arity != m.fact.args.size()) {
            ctx.reject(self + ": arity mismatch: " + what);
            continue;
        }
        bool intentional = decl.kind == RelationKind::Intentional;
        if (intentional != m.provenance.has_value()) {
            ctx.reject(self + ": relation kind mismatch: " + what);
            continue;
        }
        if (!ctx.acl.has_privilege(m.author, ref, Privilege::Write)) {
            ctx.reject(self + ": write denied for " + m.author + ": " + what);
            continue;
        }
        if (intentional) {
            Fact f = m.fact;
            f.token.reset();
            merge_into(next.contributions, Derived{std::move(f), *m.provenance});
        } else if (!next.edb.contains(m.fact.key())) {
            Fact f = m.fact;
            f.token = token_from(state.edb, f.key());
            next.edb.emplace(f.key(), std::move(f));
        }
    }

    // (2) delegations replace everything installed by delegation last round
    next.delegated_in = inbox.delegations;

    // (3) local views
    next.idb = local_fixpoint(next, ctx);

    // (4, 5) extensional heads, remote heads and further delegation
    const View view = make_view(self, next.edb, next.idb, ctx);
    std::map<FactKey, Fact> derived_edb;
    std::map<std::pair<Name, FactKey>, Message> messages;
    std::map<std::string, DelegationMsg> delegations;

    for (const auto& t : tasks_of(next)) {
        const Rule& rule = *t.rule;
        Walk w = Walker(rule, self, view, &ctx.acl, &rule.author).run(t.carried);
        for (const auto& u : w.unbound) ctx.reject(self + ": unbound delegation target " + u + " in " + to_string(rule));
        collect_delegations(rule, self, w, delegations);
        if (feeds_fixpoint(rule, self, ctx.acl)) continue;

        for (const auto& [b, prov] : w.complete) {
            Fact f = head_fact(rule, b);
            const std::string what = to_string(f.key()) + " by " + rule.author;
            if (!ctx.acl.declared(f.ref) || f.ref.relation == kAclRelation) {
                ctx.reject(self + ": unknown relation: " + what);
                continue;
            }
            const RelationDecl& decl = ctx.acl.decl(f.ref);
            if (decl.arity != f.args.size()) {
                ctx.reject(self + ": arity mismatch: " + what);
                continue;
            }
            bool intentional = decl.kind == RelationKind::Intentional;
            if (head_is_static(rule) && f.ref.peer == self && !intentional) {
                if (!ctx.acl.has_privilege(rule.author, f.ref, Privilege::Write)) {
                    ctx.reject(self + ": write denied for " + rule.author + ": " + what);
                    continue;
                }
                derived_edb.try_emplace(f.key(), f);
                continue;
            }
            auto key = std::make_pair(rule.author, f.key());
            auto it = messages.find(key);
            if (it == messages.end()) {
                Message m{self, rule.author, f, std::nullopt};
                if (intentional) m.provenance = prov;
                messages.emplace(std::move(key), std::move(m));
            } else if (intentional) {
                it->second.provenance = merge_alternatives(*it->second.provenance, prov);
            }
        }
    }

    const auto& result_edb = next.edb;
    for (auto& [key, f] : derived_edb) {
        f.token = token_from(result_edb, key);
        next.carry.emplace(key, std::move(f));
    }

    StepResult result{std::move(next), {}};
    for (auto& [_, m] : messages) result.outbox.messages.push_back(std::move(m));
    for (auto& [_, d] : delegations) result.outbox.delegations.push_back(std::move(d));
    result.outbox.sort();
    return result;
}

}  // namespace wdl
