#include "oracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace wdl::testing {

SourceProvenance minimal(const SourceProvenance& p) {
    SourceProvenance out;
    for (const auto& s : p) {
        bool absorbed = std::any_of(p.begin(), p.end(), [&](const Sources& other) {
            return other != s && std::includes(s.begin(), s.end(), other.begin(), other.end());
        });
        if (!absorbed) out.insert(s);
    }
    return out;
}

namespace {

SourceProvenance product(const SourceProvenance& a, const SourceProvenance& b) {
    SourceProvenance out;
    for (const auto& x : a) {
        for (const auto& y : b) {
            Sources u = x;
            u.insert(y.begin(), y.end());
            out.insert(std::move(u));
        }
    }
    return minimal(out);
}

void add(std::map<FactKey, SourceProvenance>& store, const FactKey& key, const SourceProvenance& prov) {
    auto& slot = store[key];
    slot.insert(prov.begin(), prov.end());
    slot = minimal(slot);
}

}  // namespace

Oracle::Oracle(const Program& program) : program_(program) {
    for (const auto& d : program_.declarations) decls_[d.ref] = d;
    for (const auto& g : program_.grants) grants_.insert({g.target, g.grantee, g.privilege});
    for (const auto& r : program_.rules) {
        Plan plan{&r, {}, 0, r.host};
        for (const auto& a : r.body) {
            if (!a.ref.ground()) throw std::invalid_argument("oracle needs ground relation and peer names");
            if (a.ref.peer.text != plan.last) {
                ++plan.hops;
                plan.last = a.ref.peer.text;
            }
            plan.delay.push_back(plan.hops);
        }
        plans_.push_back(std::move(plan));
    }
    for (const auto& f : program_.facts) next_edb_[f.key()] = {{f.ref}};
}

std::vector<Name> Oracle::principals() const {
    std::vector<Name> out;
    for (const auto& p : program_.principals) out.push_back(p.name);
    return out;
}

bool Oracle::privileged(const Name& who, const RelationKey& rel, Privilege p) const {
    if (who == rel.peer) return true;
    if (decls_.at(rel).owner == who) return true;
    if (grants_.contains({rel, who, Privilege::Owner})) return true;
    return p != Privilege::Owner && grants_.contains({rel, who, p});
}

bool Oracle::readable(const Name& who, const FactKey& key, const SourceProvenance& prov) const {
    if (!privileged(who, key.ref, Privilege::Read)) return false;
    return std::any_of(prov.begin(), prov.end(), [&](const Sources& s) {
        return std::all_of(s.begin(), s.end(), [&](const RelationKey& r) { return privileged(who, r, Privilege::Read); });
    });
}

std::set<FactKey> Oracle::readable_set(const OracleSnapshot& snapshot, const Name& who) const {
    std::set<FactKey> out;
    for (const auto* store : {&snapshot.edb, &snapshot.idb}) {
        for (const auto& [key, prov] : *store) {
            if (readable(who, key, prov)) out.insert(key);
        }
    }
    return out;
}

bool Oracle::local_view(const Plan& plan) const {
    const auto& head = plan.rule->head.ref;
    RelationKey key{head.relation.text, head.peer.text};
    return key.peer == plan.last && decls_.at(key).kind == RelationKind::Intentional;
}

Oracle::Bindings Oracle::join(const Plan& plan, int round, const Store& current_edb, const Store& current_idb) const {
    const Rule& rule = *plan.rule;
    const int start = round - plan.hops;
    Bindings partial{{Binding{}, SourceProvenance{Sources{}}}};
    for (std::size_t i = 0; i < rule.body.size(); ++i) {
        const Atom& atom = rule.body[i];
        const RelationKey rel{atom.ref.relation.text, atom.ref.peer.text};
        const int at = start + plan.delay[i];
        const Store* stores[2] = {&current_edb, &current_idb};
        if (at < round) {
            const auto& snap = history_.at(static_cast<std::size_t>(at - 1));
            stores[0] = &snap.edb;
            stores[1] = &snap.idb;
        }
        Bindings extended;
        for (const auto& [binding, prov] : partial) {
            for (const Store* store : stores) {
                for (const auto& [key, fprov] : *store) {
                    if (key.ref != rel || key.args.size() != atom.args.size()) continue;
                    Binding b = binding;
                    bool ok = true;
                    for (std::size_t k = 0; ok && k < atom.args.size(); ++k) {
                        const Term& t = atom.args[k];
                        if (!t.is_variable()) {
                            ok = t.text == key.args[k];
                        } else {
                            auto [it, fresh] = b.emplace(t.text, key.args[k]);
                            ok = fresh || it->second == key.args[k];
                        }
                    }
                    if (!ok || !readable(rule.author, key, fprov)) continue;
                    extended.emplace_back(std::move(b), atom.hidden ? prov : product(prov, fprov));
                }
            }
        }
        partial = std::move(extended);
    }
    return partial;
}

namespace {

FactKey head_key(const Rule& rule, const Binding& b) {
    FactKey key{{rule.head.ref.relation.text, rule.head.ref.peer.text}, {}};
    for (const auto& t : rule.head.args) key.args.push_back(t.is_variable() ? b.at(t.text) : t.text);
    return key;
}

}  // namespace

const OracleSnapshot& Oracle::step() {
    const int round = static_cast<int>(history_.size()) + 1;
    Store edb = std::move(next_edb_);
    Store idb = std::move(next_seeds_);
    next_edb_.clear();
    next_seeds_.clear();

    auto active = [&](const Plan& plan) {
        if (round - plan.hops < 1) return false;
        RelationKey head{plan.rule->head.ref.relation.text, plan.rule->head.ref.peer.text};
        return privileged(plan.rule->author, head, Privilege::Write);
    };

    while (true) {
        Store next = idb;
        for (const auto& plan : plans_) {
            if (!local_view(plan) || !active(plan)) continue;
            for (const auto& [b, prov] : join(plan, round, edb, idb)) add(next, head_key(*plan.rule, b), prov);
        }
        if (next == idb) break;
        idb = std::move(next);
    }

    for (const auto& plan : plans_) {
        if (local_view(plan) || !active(plan)) continue;
        for (const auto& [b, prov] : join(plan, round, edb, idb)) {
            FactKey key = head_key(*plan.rule, b);
            if (decls_.at(key.ref).kind == RelationKind::Extensional) {
                next_edb_[key] = {{key.ref}};
            } else {
                add(next_seeds_, key, prov);
            }
        }
    }

    history_.push_back({std::move(edb), std::move(idb)});
    return history_.back();
}

}  // namespace wdl::testing
