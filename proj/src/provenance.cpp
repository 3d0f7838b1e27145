#include "wdl/provenance.hpp"

#include <algorithm>
#include <cassert>

namespace wdl {

namespace {

bool token_less(const Token& a, const Token& b) { return a.id < b.id; }

Derivation unite(const Derivation& a, const Derivation& b) {
    Derivation out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out), token_less);
    return out;
}

}  // namespace

Provenance reduce(std::vector<Derivation> alternatives, bool truncated) {
    auto by_id = [](const Derivation& a, const Derivation& b) {
        return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), token_less);
    };
    auto same = [](const Derivation& a, const Derivation& b) {
        return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                          [](const Token& x, const Token& y) { return x.id == y.id; });
    };
    std::sort(alternatives.begin(), alternatives.end(), by_id);
    alternatives.erase(std::unique(alternatives.begin(), alternatives.end(), same), alternatives.end());

    // Smaller sets first so every absorber is seen before what it absorbs.
    std::vector<const Derivation*> by_size;
    for (const auto& d : alternatives) by_size.push_back(&d);
    std::stable_sort(by_size.begin(), by_size.end(),
                     [](const Derivation* a, const Derivation* b) { return a->size() < b->size(); });

    std::vector<Derivation> kept;
    for (const Derivation* d : by_size) {
        bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const Derivation& k) {
            return std::includes(d->begin(), d->end(), k.begin(), k.end(), token_less);
        });
        if (!absorbed) kept.push_back(*d);
    }
    std::sort(kept.begin(), kept.end(), by_id);
    if (kept.size() > Provenance::kMaxAlternatives) {
        kept.resize(Provenance::kMaxAlternatives);
        truncated = true;
    }
    return {std::move(kept), truncated};
}

Provenance base_provenance(const Fact& fact) {
    assert(fact.token.has_value());
    return {{Derivation{Token{*fact.token, fact.ref}}}, false};
}

Provenance combine(const Provenance& a, const Provenance& b) {
    std::vector<Derivation> out;
    out.reserve(a.alternatives.size() * b.alternatives.size());
    for (const auto& x : a.alternatives) {
        for (const auto& y : b.alternatives) out.push_back(unite(x, y));
    }
    return reduce(std::move(out), a.truncated || b.truncated);
}

Provenance combine(std::span<const std::pair<Provenance, bool>> body) {
    Provenance acc = Provenance::unit();
    for (const auto& [prov, hidden] : body) {
        if (!hidden) acc = combine(acc, prov);
    }
    return acc;
}

Provenance merge_alternatives(const Provenance& a, const Provenance& b) {
    std::vector<Derivation> all = a.alternatives;
    all.insert(all.end(), b.alternatives.begin(), b.alternatives.end());
    return reduce(std::move(all), a.truncated || b.truncated);
}

bool can_read(const Name& who, const Fact& fact, const Provenance& prov, const AclStore& acl) {
    if (!acl.has_privilege(who, fact.ref, Privilege::Read)) return false;
    return std::any_of(prov.alternatives.begin(), prov.alternatives.end(), [&](const Derivation& d) {
        return std::all_of(d.begin(), d.end(), [&](const Token& t) {
            return acl.has_privilege(who, t.source, Privilege::Read);
        });
    });
}

std::string to_string(const Provenance& prov) {
    std::string out = "{";
    for (std::size_t i = 0; i < prov.alternatives.size(); ++i) {
        if (i) out += ",";
        out += "{";
        const auto& d = prov.alternatives[i];
        for (std::size_t j = 0; j < d.size(); ++j) {
            if (j) out += ",";
            out += to_string(d[j].source) + "#" + std::to_string(d[j].id);
        }
        out += "}";
    }
    return out + "}";
}

}  // namespace wdl
