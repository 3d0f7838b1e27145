// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <random>

#include "checks.hpp"
#include "random_world.hpp"
#include "scenarios.hpp"
#include "wdl/netsim.hpp"

using namespace wdl;
namespace wt = wdl::testing;

namespace {

constexpr int kCorpusSize = 100;
constexpr int kCorpusRounds = 3;
constexpr unsigned kCorpusSeed = 20121212;

struct Check {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

std::vector<std::string> query_keys(const World& w, const Name& who, const std::string& pattern) {
    std::vector<std::string> out;
    for (const auto& f : query(w, who, parse_atom(pattern))) out.push_back(to_string(f.key()));
    return out;
}

std::vector<Program> corpus() {
    std::mt19937 rng(kCorpusSeed);
    std::vector<Program> out;
    for (int i = 0; i < kCorpusSize; ++i) out.push_back(wt::random_program(rng));
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Check union_with_provenance() {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    RunResult r = run(build_world(wt::load_scenario("allphotos.wdm")), 2);
    c.expect(r.trace.render() == wt::read_text(wt::golden_path("allphotos.trace")), "trace differs from golden file");
    std::vector<std::string> all;
    for (const auto& [key, d] : r.world.peers.at("Alice").idb) all.push_back(to_string(key));
    c.expect(all == std::vector<std::string>{"allPhotos@Alice(\"bob-beach.jpg\")", "allPhotos@Alice(\"bob-summit.jpg\")",
                                             "allPhotos@Alice(\"sue-party.jpg\")"},
             "allPhotos@Alice is not the union");
    c.expect(query_keys(r.world, "Charlie", "allPhotos@Alice($f)") ==
                 std::vector<std::string>{"allPhotos@Alice(\"bob-beach.jpg\")", "allPhotos@Alice(\"bob-summit.jpg\")"},
             "Charlie does not see exactly Bob's photos");
    double s = seconds_since(t0);
    c.expect(s < 1.0, "took " + std::to_string(s) + " s");
    return c;
}

Check multi_derivation() {
    Check c;
    const Program base = wt::load_scenario("multiderivation.wdm");
    const RelationKey r1{"r1", "P"}, r2{"r2", "P"}, r3{"r3", "P"};
    for (int mask = 0; mask < 8; ++mask) {
        Program p = base;
        const RelationKey rels[] = {r1, r2, r3};
        for (int i = 0; i < 3; ++i)
            if (mask & (1 << i)) p.grants.push_back({rels[i], "Reader", Privilege::Read, {}});
        World w = run(build_world(p), 1).world;
        bool sees = !query_keys(w, "Reader", "f@P(\"x\")").empty();
        bool f1 = mask & 1, f2 = mask & 2, f3 = mask & 4;
        c.expect(sees == (f3 || (f1 && f2)), "wrong outcome for read set " + std::to_string(mask));
    }
    return c;
}

Check hide_override() {
    Check c;
    World hide = run(build_world(wt::load_scenario("hide.wdm")), 2).world;
    World plain = run(build_world(wt::load_scenario("hide_off.wdm")), 2).world;
    c.expect(query_keys(hide, "Pete", "allPhotos@Pete($f)") ==
                 std::vector<std::string>{"allPhotos@Pete(\"alice-climb.jpg\")", "allPhotos@Pete(\"alice-lake.jpg\")"},
             "Pete does not see Alice's photos with hide");
    c.expect(query_keys(plain, "Pete", "allPhotos@Pete($f)").empty(), "Pete sees photos without hide");
    return c;
}

Check delegation_sandbox() {
    Check c;
    Program p = wt::load_scenario("hatemail.wdm");
    World w = run(build_world(p), 3).world;
    const auto& sue = w.peers.at("Sue").edb;
    FactKey mail{{"message", "Sue"}, {"I hate you"}};
    c.expect(sue.contains(mail) && sue.at(mail).author == "Bob", "hate mail not delivered with author Bob");
    c.expect(w.peers.at("Bob").edb.empty() && w.peers.at("Bob").carry.empty(), "secret leaked without Read");

    p.grants.push_back({{"secret", "Alice"}, "Bob", Privilege::Read, {}});
    World granted = run(build_world(p), 3).world;
    c.expect(query_keys(granted, "Bob", "aliceSecret@Bob($x)") ==
                 std::vector<std::string>{"aliceSecret@Bob(\"diary-key\")", "aliceSecret@Bob(\"safe-combination\")"},
             "secret not delivered once granted");
    return c;
}

Check non_persistence() {
    Check c;
    World w = build_world(wt::load_scenario("persistence.wdm"));
    const FactKey m{{"m", "p"}, {"u"}}, n{{"n", "p"}, {"v"}};
    step_world(w);
    c.expect(w.peers.at("p").edb.contains(n), "n missing in its first round");
    for (int r = 2; r <= 11; ++r) {
        step_world(w);
        c.expect(!w.peers.at("p").edb.contains(n), "n still present in round " + std::to_string(r));
        c.expect(w.peers.at("p").edb.contains(m), "m lost in round " + std::to_string(r));
    }
    return c;
}

Check oracle_equivalence(const std::vector<Program>& worlds) {
    Check c;
    auto t0 = std::chrono::steady_clock::now();
    int delegations = 0;
    for (std::size_t i = 0; i < worlds.size(); ++i) {
        auto diff = wt::oracle_disagreement(worlds[i], kCorpusRounds);
        c.expect(!diff, "world " + std::to_string(i) + ": " + diff.value_or(""));
        delegations += wt::corpus_stats(worlds[i], kCorpusRounds).delegations;
    }
    c.expect(delegations > 0, "corpus never delegates");
    double s = seconds_since(t0);
    c.expect(s < 60.0, "took " + std::to_string(s) + " s");
    if (c.ok) c.detail = std::to_string(worlds.size()) + " worlds, " + std::to_string(delegations) + " delegations";
    return c;
}

Check determinism(const std::vector<Program>& worlds) {
    Check c;
    std::vector<std::pair<std::string, Program>> programs;
    for (const char* name : {"allphotos.wdm", "multiderivation.wdm", "hide.wdm", "hide_off.wdm", "hatemail.wdm",
                             "persistence.wdm", "fontainbleau.wdm"})
        programs.emplace_back(name, wt::load_scenario(name));
    for (std::size_t i = 0; i < worlds.size(); ++i) programs.emplace_back("world " + std::to_string(i), worlds[i]);

    std::mt19937 rng(7);
    for (const auto& [name, p] : programs) {
        std::string first = run(build_world(p), 5).trace.render();
        c.expect(run(build_world(p), 5).trace.render() == first, name + ": repeated run differs");
        c.expect(run(build_world(wt::shuffled(p, rng)), 5).trace.render() == first, name + ": permuted run differs");
    }
    return c;
}

Check sandbox_containment(const std::vector<Program>& worlds) {
    Check c;
    for (std::size_t i = 0; i < worlds.size(); ++i) {
        auto v = wt::containment_violation(worlds[i], kCorpusRounds);
        c.expect(!v, "world " + std::to_string(i) + ": " + v.value_or(""));
    }
    // The scenarios with delegated rules, including the granted variant.
    Program granted = wt::load_scenario("hatemail.wdm");
    granted.grants.push_back({{"secret", "Alice"}, "Bob", Privilege::Read, {}});
    for (const auto& p : {wt::load_scenario("hatemail.wdm"), granted, wt::load_scenario("fontainbleau.wdm")}) {
        auto v = wt::containment_violation(p, 6);
        c.expect(!v, v.value_or(""));
    }
    return c;
}

}  // namespace

int main() {
    const std::vector<Program> worlds = corpus();
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"union with provenance", union_with_provenance},
        {"multi-derivation sufficiency", multi_derivation},
        {"hide override", hide_override},
        {"delegation sandbox", delegation_sandbox},
        {"non-persistence", non_persistence},
        {"oracle equivalence", [&] { return oracle_equivalence(worlds); }},
        {"determinism", [&] { return determinism(worlds); }},
        {"sandbox containment", [&] { return sandbox_containment(worlds); }},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.ok = false;
            c.detail = std::string("exception: ") + e.what();
        }
        char time[32];
        std::snprintf(time, sizeof time, "%.2f s", seconds_since(t0));
        std::cout << (c.ok ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << " (" << time << ")";
        if (!c.detail.empty()) std::cout << ": " << c.detail;
        std::cout << '\n';
        failed += !c.ok;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
