// wdl: run, query and inspect multi-peer scenarios.
//
//   wdl check SCENARIO
//   wdl run SCENARIO [--rounds N | --until-quiescent] [--max-rounds N] [--trace PATH] [--seed N]
//   wdl query SCENARIO --as PRINCIPAL [--rounds N] PATTERN
//   wdl acl list SCENARIO PEER
//
// Exit status: 0 success, 1 parse/validation/usage error, 2 round cap hit.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "wdl/netsim.hpp"
#include "wdl/parser.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitRoundCap = 2;

struct InputError {
    std::string message;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError{path + ": cannot open file"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string located(const std::string& path, int line, int col, const std::string& what) {
    if (line <= 0) return path + ": " + what;
    return path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what;
}

wdl::Program load(const std::string& path) {
    std::string text = read_file(path);
    try {
        return wdl::parse_program(text);
    } catch (const wdl::SyntaxError& e) {
        throw InputError{located(path, e.line(), e.col(), e.what())};
    } catch (const wdl::ValidationError& e) {
        throw InputError{located(path, e.pos().line, e.pos().col, e.what())};
    }
}

struct RunOptions {
    std::string scenario;
    int rounds = -1;  // -1: until quiescent
    bool until_quiescent = false;
    int max_rounds = 1000;
};

wdl::RunResult execute(const RunOptions& opt) {
    wdl::World world = wdl::build_world(load(opt.scenario));
    if (opt.until_quiescent || opt.rounds < 0) return wdl::run_until_quiescent(std::move(world), opt.max_rounds);
    return wdl::run(std::move(world), opt.rounds);
}

bool hit_cap(const RunOptions& opt, const wdl::RunResult& r) {
    return (opt.until_quiescent || opt.rounds < 0) && !r.quiescent;
}

void print_summary(std::ostream& os, const RunOptions& opt, const wdl::RunResult& r) {
    os << "rounds " << r.trace.rounds.size();
    if (opt.until_quiescent || opt.rounds < 0) os << (r.quiescent ? " (quiescent)" : " (round cap reached)");
    os << '\n';
    std::map<std::string, std::size_t> counts;
    for (const auto& [_, peer] : r.world.peers) {
        for (const auto& [key, f] : peer.edb) ++counts[wdl::to_string(key.ref)];
        for (const auto& [key, d] : peer.idb) ++counts[wdl::to_string(key.ref)];
    }
    for (const auto& [rel, n] : counts) os << "relation " << rel << ": " << n << " facts\n";
    std::size_t rejected = 0;
    for (const auto& round : r.trace.rounds) rejected += round.rejected.size();
    os << "rejections " << rejected << '\n';
}

int cmd_check(const std::string& scenario) {
    wdl::Program p = load(scenario);
    std::cout << scenario << ": ok (" << p.principals.size() << " principals, " << p.declarations.size()
              << " relations, " << p.facts.size() << " facts, " << p.rules.size() << " rules, " << p.grants.size()
              << " grants)\n";
    return kExitOk;
}

int cmd_run(const RunOptions& opt, const std::string& trace_path, long seed) {
    wdl::RunResult r = execute(opt);
    std::string trace = r.trace.render(seed);
    if (trace_path.empty() || trace_path == "-") {
        std::cout << trace;
        print_summary(std::cerr, opt, r);
    } else {
        std::ofstream out(trace_path, std::ios::binary);
        if (!out) throw InputError{trace_path + ": cannot write trace"};
        out << trace;
        print_summary(std::cout, opt, r);
    }
    return hit_cap(opt, r) ? kExitRoundCap : kExitOk;
}

int cmd_query(const RunOptions& opt, const std::string& who, const std::string& pattern_text) {
    wdl::Atom pattern;
    try {
        pattern = wdl::parse_atom(pattern_text);
    } catch (const wdl::SyntaxError& e) {
        throw InputError{located("pattern", e.line(), e.col(), e.what())};
    }
    wdl::RunResult r = execute(opt);
    try {
        for (const auto& f : wdl::query(r.world, who, pattern)) std::cout << wdl::to_string(f.key()) << '\n';
    } catch (const wdl::ValidationError& e) {
        throw InputError{e.what()};
    }
    return hit_cap(opt, r) ? kExitRoundCap : kExitOk;
}

int cmd_acl_list(const std::string& scenario, const std::string& peer) {
    wdl::World world = wdl::build_world(load(scenario));
    if (!world.peers.contains(peer)) throw InputError{"unknown peer '" + peer + "'"};
    std::vector<std::string> lines;
    for (const auto& g : world.acl.grants(peer)) {
        lines.push_back(std::string("grant ") + wdl::to_string(g.privilege) + " on " + wdl::to_string(g.target) +
                        " to " + g.grantee);
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& l : lines) std::cout << l << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-peer WebdamLog engine with collaborative access control"};
    app.require_subcommand(1);

    std::string scenario;
    RunOptions opt;
    std::string trace_path;
    long seed = 0;
    std::string who;
    std::string pattern;
    std::string peer;

    auto* check = app.add_subcommand("check", "Parse and validate a scenario");
    check->add_option("scenario", scenario, "Scenario file")->required();

    auto add_rounds = [&](CLI::App* sub) {
        auto* rounds = sub->add_option("--rounds", opt.rounds, "Number of rounds")->check(CLI::NonNegativeNumber);
        auto* until = sub->add_flag("--until-quiescent", opt.until_quiescent, "Run until the world stops changing");
        rounds->excludes(until);
        sub->add_option("--max-rounds", opt.max_rounds, "Round cap for --until-quiescent")
            ->check(CLI::NonNegativeNumber);
    };

    auto* run = app.add_subcommand("run", "Run a scenario and print its trace");
    run->add_option("scenario", opt.scenario, "Scenario file")->required();
    add_rounds(run);
    run->add_option("--trace", trace_path, "Write the trace to PATH instead of stdout ('-' is stdout)");
    run->add_option("--seed", seed, "Label recorded in the trace");

    auto* query = app.add_subcommand("query", "Run a scenario, then list facts readable by a principal");
    query->add_option("scenario", opt.scenario, "Scenario file")->required();
    query->add_option("pattern", pattern, "Atom such as 'allPhotos@Alice($f)'")->required();
    query->add_option("--as", who, "Reading principal")->required();
    add_rounds(query);

    auto* acl = app.add_subcommand("acl", "Inspect access control lists");
    acl->require_subcommand(1);
    auto* acl_list = acl->add_subcommand("list", "List the grants held at a peer");
    acl_list->add_option("scenario", scenario, "Scenario file")->required();
    acl_list->add_option("peer", peer, "Peer")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (check->parsed()) return cmd_check(scenario);
        if (run->parsed()) return cmd_run(opt, trace_path, seed);
        if (query->parsed()) return cmd_query(opt, who, pattern);
        if (acl_list->parsed()) return cmd_acl_list(scenario, peer);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.message << '\n';
        return kExitInvalid;
    } catch (const wdl::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}
