#include "checks.hpp"

#include <algorithm>
#include <sstream>

#include "oracle.hpp"

namespace wdl::testing {

namespace {

SourceProvenance sources_of(const Provenance& p) {
    SourceProvenance out;
    for (const auto& d : p.alternatives) {
        Sources s;
        for (const auto& t : d) s.insert(t.source);
        out.insert(std::move(s));
    }
    return minimal(out);
}

std::string describe(const SourceProvenance& p) {
    std::string out = "{";
    for (const auto& s : p) {
        out += "{";
        for (const auto& r : s) out += to_string(r) + ",";
        out += "}";
    }
    return out + "}";
}

struct EngineSnapshot {
    std::map<FactKey, SourceProvenance> edb, idb;
    std::set<FactKey> truncated;
};

EngineSnapshot snapshot(const World& w) {
    EngineSnapshot s;
    for (const auto& [_, peer] : w.peers) {
        for (const auto& [key, f] : peer.edb) s.edb[key] = sources_of(base_provenance(f));
        for (const auto& [key, d] : peer.idb) {
            s.idb[key] = sources_of(d.prov);
            if (d.prov.truncated) s.truncated.insert(key);
        }
    }
    return s;
}

std::optional<std::string> compare(const char* what, int round, const std::map<FactKey, SourceProvenance>& engine,
                                   const std::map<FactKey, SourceProvenance>& oracle,
                                   const std::set<FactKey>& truncated) {
    for (const auto& [key, prov] : engine) {
        auto it = oracle.find(key);
        if (it == oracle.end()) {
            return "round " + std::to_string(round) + " " + what + ": engine only: " + to_string(key);
        }
        if (!truncated.contains(key) && it->second != prov) {
            return "round " + std::to_string(round) + " " + what + ": provenance of " + to_string(key) + " engine " +
                   describe(prov) + " oracle " + describe(it->second);
        }
    }
    for (const auto& [key, _] : oracle) {
        if (!engine.contains(key)) {
            return "round " + std::to_string(round) + " " + what + ": oracle only: " + to_string(key);
        }
    }
    return std::nullopt;
}

std::set<FactKey> engine_readable(const World& w, const Name& who) {
    std::set<FactKey> out;
    for (const auto& [_, peer] : w.peers) {
        for (const auto& [key, f] : peer.edb)
            if (can_read(who, f, base_provenance(f), w.acl)) out.insert(key);
        for (const auto& [key, d] : peer.idb)
            if (can_read(who, d.fact, d.prov, w.acl)) out.insert(key);
    }
    return out;
}

}  // namespace

std::optional<std::string> oracle_disagreement(const Program& program, int rounds) {
    World world = build_world(program);
    Oracle oracle(program);
    for (int r = 1; r <= rounds; ++r) {
        step_world(world);
        const OracleSnapshot& expected = oracle.step();
        EngineSnapshot got = snapshot(world);
        if (auto d = compare("edb", r, got.edb, expected.edb, {})) return d;
        if (auto d = compare("idb", r, got.idb, expected.idb, got.truncated)) return d;
        for (const auto& who : oracle.principals()) {
            // A truncated fact may lose a read path; both sides must still agree
            // whenever the engine grants access.
            auto mine = engine_readable(world, who);
            auto theirs = oracle.readable_set(expected, who);
            for (const auto& key : got.truncated) {
                if (!mine.contains(key)) theirs.erase(key);
            }
            if (mine != theirs) {
                return "round " + std::to_string(r) + ": readable set of " + who + " differs";
            }
        }
    }
    return std::nullopt;
}

std::optional<std::string> containment_violation(const Program& program, int rounds) {
    World world = build_world(program);
    for (int r = 1; r <= rounds; ++r) {
        step_world(world);
        TokenCounter tokens(world.next_token);
        RoundContext ctx{world.acl, &world.acl_tokens, &tokens, nullptr};
        for (const auto& [name, peer] : world.peers) {
            for (const auto& d : peer.delegated_in) {
                const Name& delegator = d.residual.delegated_by ? *d.residual.delegated_by : d.author;
                View full = make_view(name, peer.edb, peer.idb, ctx);
                View readable;
                for (const auto& [rel, facts] : full) {
                    for (const auto& [args, derived] : facts) {
                        if (can_read(delegator, derived.fact, derived.prov, world.acl))
                            readable[rel].emplace(args, derived);
                    }
                }
                std::set<FactKey> allowed;
                for (const auto& x : evaluate_unrestricted(d.residual, readable, d.carried)) allowed.insert(x.fact.key());
                for (const auto& x : evaluate_sandboxed(d, peer, ctx)) {
                    if (!allowed.contains(x.fact.key())) {
                        return "round " + std::to_string(r) + " at " + name + ": " + to_string(x.fact.key()) +
                               " escapes the sandbox of " + d.serialize();
                    }
                    if (x.fact.author != delegator) {
                        return "round " + std::to_string(r) + " at " + name + ": " + to_string(x.fact.key()) +
                               " authored by " + x.fact.author + " instead of " + delegator;
                    }
                }
            }
        }
    }
    return std::nullopt;
}

Program shuffled(Program program, std::mt19937& rng) {
    std::shuffle(program.principals.begin(), program.principals.end(), rng);
    std::shuffle(program.declarations.begin(), program.declarations.end(), rng);
    std::shuffle(program.facts.begin(), program.facts.end(), rng);
    std::shuffle(program.rules.begin(), program.rules.end(), rng);
    std::shuffle(program.grants.begin(), program.grants.end(), rng);
    return program;
}

CorpusStats corpus_stats(const Program& program, int rounds) {
    CorpusStats stats;
    World world = build_world(program);
    for (int r = 1; r <= rounds; ++r) {
        RoundTrace t = step_world(world);
        stats.delegations += static_cast<int>(t.delegations.size());
        for (const auto& [_, peer] : world.peers)
            for (const auto& [key, d] : peer.idb) stats.truncated += d.prov.truncated;
    }
    return stats;
}

}  // namespace wdl::testing
