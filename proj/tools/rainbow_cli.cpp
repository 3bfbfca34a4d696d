// Experiment harness for the rainbow decomposition library: instance
// generators, pipeline drivers, verification gates and report emission.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rainbow/config.hpp"
#include "rainbow/generate.hpp"
#include "rainbow/hamilton.hpp"
#include "rainbow/io.hpp"
#include "rainbow/matchings.hpp"
#include "rainbow/nibble.hpp"
#include "rainbow/oracle.hpp"
#include "rainbow/pseudorandom.hpp"
#include "rainbow/regularize.hpp"
#include "rainbow/report.hpp"
#include "rainbow/trees.hpp"

using namespace rainbow;

namespace {

bool g_quiet = false;

void say(const std::string& line) {
    if (!g_quiet) std::cout << line << "\n";
}

json families_to_json(const std::string& kind, const std::vector<std::vector<Edge>>& families) {
    json out;
    out["kind"] = kind;
    json arr = json::array();
    for (const auto& f : families) arr.push_back(edges_to_json(f));
    out["structures"] = arr;
    return out;
}

void maybe_write(const std::string& path, const json& j) {
    if (path.empty()) return;
    write_text_file(path, j.dump(2) + "\n");
}

EdgeColouredGraph load_instance_graph(const std::string& path) {
    // Square CSV or coloured-graph text, sniffed by the header.
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string first;
    std::getline(in, first);
    in.clear();
    in.seekg(0);
    if (first.rfind("n ", 0) == 0) return graph_from_text(in);
    return square_to_bipartite(square_from_csv(in));
}

double derive_epsilon_knn(const EdgeColouredGraph& host) {
    double best = 0.0;
    for (int i = 1; i <= 190; ++i) {
        double eps = 0.00025 * i;
        if (20.0 * eps >= 1.0) break;
        if (few_large_colours(host, eps)) best = eps;
    }
    return best;
}

double derive_epsilon_kn(const EdgeColouredGraph& host) {
    double best = 0.0;
    for (int i = 1; i <= 399; ++i) {
        double eps = 0.0025 * i;
        if (few_large_colours_general(host, eps)) best = eps;
    }
    return best;
}

// ---- run drivers ----

DecompositionReport run_transversals(const EdgeColouredGraph& host, PipelineConfig cfg,
                                     std::uint64_t seed, const std::string& out_structs) {
    DecompositionReport report;
    report.pipeline = "transversals";
    report.config = cfg;
    report.config.seed = seed;
    int n = static_cast<int>(host.bipartition().x.size());
    report.instance_description = "K_{" + std::to_string(n) + "," + std::to_string(n) +
                                  "} with " + std::to_string(host.n_colours()) + " colours";
    Stopwatch watch;
    double eps = cfg.epsilon > 0 ? cfg.epsilon : derive_epsilon_knn(host);
    Rng rng(seed);
    auto res = knn_transversal_pipeline(host, eps, rng, cfg.companion_fraction,
                                        cfg.matching_config());
    report.diagnostics["epsilon"] = eps;
    if (!res.hypothesis_ok) {
        report.status = "rejected-hypothesis";
        report.diagnostics["gate"] = res.gate_message;
        report.wall_ms = watch.ms();
        return report;
    }
    std::vector<std::vector<Edge>> families;
    for (const auto& m : res.family.matchings) {
        auto rep = verify_perfect_matching(m, host);
        ++report.structures_verified;
        if (!rep.ok()) {
            ++report.verification_failures;
            report.diagnostics["first_failure"] = rep.summary();
            continue;
        }
        report.family_sizes.push_back(m.size());
        families.push_back(m.edges);
    }
    if (!verify_pairwise_disjoint(families).ok()) ++report.verification_failures;
    report.diagnostics["attempted"] = res.attempted;
    report.diagnostics["completion_failures"] = res.failures;
    report.wall_ms = watch.ms();
    maybe_write(out_structs, families_to_json("perfect_matchings", families));
    return report;
}

DecompositionReport run_hamilton(const EdgeColouredGraph& host, PipelineConfig cfg,
                                 std::uint64_t seed, const std::string& out_structs) {
    DecompositionReport report;
    report.pipeline = "hamilton";
    report.config = cfg;
    report.config.seed = seed;
    report.instance_description = "K_" + std::to_string(host.n_vertices()) + " with " +
                                  std::to_string(host.n_colours()) + " colours";
    Stopwatch watch;
    double eps = cfg.epsilon > 0 ? cfg.epsilon : derive_epsilon_kn(host);
    Rng rng(seed);
    auto res = hamiltonian_decomposition(host, eps, rng, cfg.hamilton_config());
    report.diagnostics["epsilon"] = eps;
    if (!res.hypothesis_ok) {
        report.status = "rejected-hypothesis";
        report.diagnostics["gate"] = res.gate_message;
        report.wall_ms = watch.ms();
        return report;
    }
    for (std::size_t i = 0; i < res.cycles.size(); ++i) {
        auto rep = verify_hamiltonian_cycle(res.cycles[i], host);
        ++report.structures_verified;
        if (!rep.ok())
            ++report.verification_failures;
        else
            report.family_sizes.push_back(static_cast<int>(res.cycle_edges[i].size()));
    }
    if (!verify_pairwise_disjoint(res.cycle_edges).ok()) ++report.verification_failures;
    report.diagnostics["factors_built"] = res.factors_built;
    report.diagnostics["completion_failures"] = res.completion_failures;
    report.diagnostics["desk_route"] = res.desk_route;
    report.wall_ms = watch.ms();
    maybe_write(out_structs, families_to_json("hamiltonian_cycles", res.cycle_edges));
    return report;
}

DecompositionReport run_trees(const EdgeColouredGraph& host, PipelineConfig cfg,
                              std::uint64_t seed, const std::string& out_structs) {
    DecompositionReport report;
    report.pipeline = "trees";
    report.config = cfg;
    report.config.seed = seed;
    report.instance_description = "K_" + std::to_string(host.n_vertices()) + " with " +
                                  std::to_string(host.n_colours()) + " colours";
    Stopwatch watch;
    Rng rng(seed);
    auto res = spanning_tree_decomposition(host, cfg.tree_eps, rng, cfg.tree_config());
    std::vector<std::vector<Edge>> families;
    for (const auto& t : res.trees) {
        auto rep = verify_forest(t, host);
        ++report.structures_verified;
        if (!rep.ok()) {
            ++report.verification_failures;
            continue;
        }
        report.family_sizes.push_back(t.size());
        families.push_back(t.edges);
    }
    if (!verify_pairwise_disjoint(res.tree_edges).ok()) ++report.verification_failures;
    report.diagnostics["many_large_branch"] = res.many_large_branch;
    report.diagnostics["invariant_violations"] = res.invariant_violations;
    report.diagnostics["greedy_topup"] = res.greedy_topup;
    if (!res.note.empty()) report.diagnostics["note"] = res.note;
    if (res.invariant_violations > 0) ++report.verification_failures;
    report.wall_ms = watch.ms();
    maybe_write(out_structs, families_to_json("spanning_trees", families));
    return report;
}

DecompositionReport run_nibble(const EdgeColouredGraph& host, PipelineConfig cfg,
                               std::uint64_t seed, const std::string& out_structs) {
    DecompositionReport report;
    report.pipeline = "nibble";
    report.config = cfg;
    report.config.seed = seed;
    int n = static_cast<int>(host.bipartition().x.size());
    report.instance_description = "bipartite host, parts of " + std::to_string(n) + ", " +
                                  std::to_string(host.n_colours()) + " colours";
    Stopwatch watch;
    Rng rng(seed);
    auto res = near_perfect_rainbow_matching(host, cfg.nibble_config(), rng);
    auto rep = verify_matching(res.matching, host);
    ++report.structures_verified;
    if (!rep.ok()) ++report.verification_failures;
    report.family_sizes.push_back(res.matching.size());
    report.diagnostics["conservation_ok"] = res.trajectory.conservation_ok;
    report.diagnostics["envelope_violations"] = res.trajectory.envelope_violations;
    json rounds = json::array();
    for (const auto& r : res.trajectory.rounds)
        rounds.push_back({{"round", r.round},
                          {"n_t", r.target_n},
                          {"delta_t", r.target_delta},
                          {"delta_observed", r.delta_observed},
                          {"matching_size", r.matching_size},
                          {"largest_colour", r.largest_colour},
                          {"envelope_ok", r.envelope_ok}});
    report.diagnostics["trajectory"] = rounds;
    if (!res.trajectory.conservation_ok) ++report.verification_failures;
    report.wall_ms = watch.ms();
    maybe_write(out_structs, families_to_json("matchings", {res.matching.edges}));
    return report;
}

DecompositionReport run_pipeline(const std::string& pipeline, const EdgeColouredGraph& host,
                                 const PipelineConfig& cfg, std::uint64_t seed,
                                 const std::string& out_structs) {
    if (pipeline == "transversals") return run_transversals(host, cfg, seed, out_structs);
    if (pipeline == "hamilton") return run_hamilton(host, cfg, seed, out_structs);
    if (pipeline == "trees") return run_trees(host, cfg, seed, out_structs);
    if (pipeline == "nibble") return run_nibble(host, cfg, seed, out_structs);
    throw std::runtime_error("unknown pipeline '" + pipeline + "'");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rainbow decompositions of properly edge-coloured graphs"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    app.add_flag("--quiet", g_quiet, "suppress progress lines");

    PipelineConfig cfg;
    std::string config_path;
    std::uint64_t seed = 1;
    int trials = 1;
    std::string json_out;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--trials", trials, "trial count");
        sub->add_option("--config", config_path, "flat key=value config file");
        sub->add_option("--json-out", json_out, "report JSON path");
    };

    // generate
    auto* gen = app.add_subcommand("generate", "write an instance file");
    std::string gen_kind = "onefactorization-knn", gen_out = "instance.txt";
    int gen_n = 10, gen_symbols = 0;
    gen->add_option("--kind", gen_kind,
                    "onefactorization-knn | onefactorization-kn | generalized-square | circulant");
    gen->add_option("--n", gen_n, "order");
    gen->add_option("--symbols", gen_symbols, "target symbol count (generalized-square)");
    gen->add_option("--out", gen_out, "output path");
    add_common(gen);

    // run
    auto* run = app.add_subcommand("run", "drive a pipeline and verify everything");
    std::string run_pipeline_name = "transversals", run_instance, run_structs;
    run->add_option("--pipeline", run_pipeline_name, "transversals | hamilton | trees | nibble");
    run->add_option("--instance", run_instance, "instance file (square CSV or graph text)")
        ->required();
    run->add_option("--structs-out", run_structs, "structure family JSON path");
    add_common(run);

    // bench
    auto* bench = app.add_subcommand("bench", "grid sweep, CSV output");
    std::string bench_pipeline = "transversals", bench_instance, bench_csv = "sweep.csv";
    std::vector<std::string> sweeps;
    bench->add_option("--pipeline", bench_pipeline, "pipeline name");
    bench->add_option("--instance", bench_instance, "instance file")->required();
    bench->add_option("--sweep", sweeps, "key=v1,v2,... (repeatable)");
    bench->add_option("--csv", bench_csv, "output CSV path");
    add_common(bench);

    // check
    auto* check = app.add_subcommand("check", "pseudorandomness checkers");
    std::string check_what = "typical", check_instance;
    double check_gamma = 0.2, check_delta = 1.0, check_n = 0, check_eps = 0.1;
    int check_k = 8;
    check->add_option("--what", check_what,
                      "regular | typical | boundedness | cover | core | orientation");
    check->add_option("--instance", check_instance)->required();
    check->add_option("--gamma", check_gamma);
    check->add_option("--delta", check_delta);
    check->add_option("--n", check_n);
    check->add_option("--eps", check_eps);
    check->add_option("--k", check_k);
    add_common(check);

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "re-verify a structure family file");
    std::string verify_instance, verify_structs, verify_kind = "matching";
    verify_cmd->add_option("--instance", verify_instance)->required();
    verify_cmd->add_option("--structures", verify_structs)->required();
    verify_cmd->add_option("--kind", verify_kind,
                           "matching | perfect-matching | two-factor | hamiltonian | "
                           "forest | spanning-tree");
    add_common(verify_cmd);

    // oracle
    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force baselines");
    std::string oracle_op = "transversals", oracle_instance;
    oracle_cmd->add_option("--op", oracle_op,
                           "max-rainbow-matching | transversals | disjoint-transversals | "
                           "rainbow-hamiltonian");
    oracle_cmd->add_option("--instance", oracle_instance)->required();
    add_common(oracle_cmd);

    // regularize
    auto* reg = app.add_subcommand("regularize", "regularization audit runs");
    std::string reg_op = "bipartite", reg_instance;
    int reg_d = 0;
    double reg_eps = 0.03;
    reg->add_option("--op", reg_op, "bipartite | general | thin");
    reg->add_option("--instance", reg_instance)->required();
    reg->add_option("--d", reg_d, "target degree (0: largest feasible)");
    reg->add_option("--eps", reg_eps, "thinning epsilon");
    add_common(reg);

    // hamilton
    auto* ham = app.add_subcommand("hamilton", "Hamiltonian decompositions");
    std::string ham_mode = "pipeline", ham_instance, ham_structs, ham_colouring_out;
    int ham_n = 11;
    ham->add_option("--mode", ham_mode, "circulant | pipeline");
    ham->add_option("--n", ham_n, "prime order for circulant mode");
    ham->add_option("--instance", ham_instance, "graph file for pipeline mode");
    ham->add_option("--structs-out", ham_structs, "cycle family JSON path");
    ham->add_option("--colouring-out", ham_colouring_out, "write the circulant colouring here");
    add_common(ham);

    // trees
    auto* trees_cmd = app.add_subcommand("trees", "spanning rainbow tree decomposition");
    std::string trees_instance, trees_structs;
    int trees_generate = 0;
    trees_cmd->add_option("--input", trees_instance, "colouring file");
    trees_cmd->add_option("--generate", trees_generate, "round-robin K_n of this order instead");
    trees_cmd->add_option("--structs-out", trees_structs, "tree family JSON path");
    add_common(trees_cmd);

    // transversals
    auto* tr = app.add_subcommand("transversals", "disjoint transversal pipeline");
    std::string tr_input, tr_structs;
    double tr_eps = 0.0;
    tr->add_option("--input", tr_input, "square CSV")->required();
    tr->add_option("--epsilon", tr_eps, "census epsilon (0: derive)");
    tr->add_option("--structs-out", tr_structs);
    add_common(tr);

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) cfg.load_file(config_path);
        cfg.seed = seed;
        cfg.trials = trials;

        if (gen->parsed()) {
            Rng rng(seed);
            if (gen_kind == "onefactorization-knn") {
                save_graph(one_factorized_knn(gen_n), gen_out);
            } else if (gen_kind == "onefactorization-kn") {
                save_graph(one_factorized_kn(gen_n), gen_out);
            } else if (gen_kind == "circulant") {
                save_graph(circulant_colouring(gen_n), gen_out);
            } else if (gen_kind == "generalized-square") {
                int target = gen_symbols > 0 ? gen_symbols : gen_n * gen_n / 2;
                save_square(random_generalized_square(gen_n, target, rng), gen_out);
            } else {
                throw std::runtime_error("unknown kind '" + gen_kind + "'");
            }
            say("wrote " + gen_out);
            return 0;
        }

        if (run->parsed()) {
            auto host = load_instance_graph(run_instance);
            auto report = run_pipeline(run_pipeline_name, host, cfg, seed, run_structs);
            maybe_write(json_out, report.to_json());
            say(report.pipeline + ": status=" + report.status + " family=" +
                std::to_string(report.family_sizes.size()) + " failures=" +
                std::to_string(report.verification_failures));
            return report.success() ? 0 : 1;
        }

        if (bench->parsed()) {
            auto host = load_instance_graph(bench_instance);
            std::vector<std::pair<std::string, std::vector<std::string>>> grid;
            for (const auto& s : sweeps) {
                auto eq = s.find('=');
                if (eq == std::string::npos) throw std::runtime_error("bad sweep '" + s + "'");
                std::string key = s.substr(0, eq);
                std::vector<std::string> values;
                std::stringstream ss(s.substr(eq + 1));
                std::string tok;
                while (std::getline(ss, tok, ',')) values.push_back(tok);
                grid.push_back({key, values});
            }
            std::ofstream csv(bench_csv);
            for (const auto& [k, vs] : grid) csv << k << ",";
            csv << "success_rate,mean_family_size,mean_runtime_ms\n";
            std::vector<std::size_t> idx(grid.size(), 0);
            bool more = !grid.empty();
            while (more) {
                PipelineConfig point = cfg;
                for (std::size_t i = 0; i < grid.size(); ++i)
                    point.set(grid[i].first, grid[i].second[idx[i]]);
                int successes = 0;
                double family_total = 0, time_total = 0;
                for (int t = 0; t < trials; ++t) {
                    std::uint64_t trial_seed = seed + 1000003ULL * t;
                    auto report = run_pipeline(bench_pipeline, host, point, trial_seed, "");
                    if (report.success()) ++successes;
                    family_total += static_cast<double>(report.family_sizes.size());
                    time_total += report.wall_ms;
                }
                for (std::size_t i = 0; i < grid.size(); ++i)
                    csv << grid[i].second[idx[i]] << ",";
                csv << (static_cast<double>(successes) / trials) << ","
                    << (family_total / trials) << "," << (time_total / trials) << "\n";
                int at = static_cast<int>(grid.size()) - 1;
                while (at >= 0 && ++idx[at] == grid[at].second.size()) idx[at--] = 0;
                more = at >= 0;
            }
            say("wrote " + bench_csv);
            return 0;
        }

        if (check->parsed()) {
            auto host = load_instance_graph(check_instance);
            double n = check_n > 0 ? check_n
                                   : (host.is_bipartite()
                                          ? static_cast<double>(host.bipartition().x.size())
                                          : static_cast<double>(host.n_vertices()));
            json out;
            Rng rng(seed);
            if (check_what == "regular") {
                auto [ok, rep] = check_regular(host, check_gamma, check_delta, n);
                out = {{"ok", ok},
                       {"gamma_achieved", rep.gamma_achieved},
                       {"delta_estimate", rep.delta_estimate},
                       {"worst_vertex", rep.worst_vertex}};
            } else if (check_what == "typical") {
                auto [ok, rep] = check_typical(host, check_gamma, check_delta, n);
                out = {{"ok", ok},
                       {"gamma_achieved", rep.gamma_achieved},
                       {"delta_estimate", rep.delta_estimate},
                       {"worst_vertex", rep.worst_vertex},
                       {"worst_pair", {rep.worst_pair.first, rep.worst_pair.second}}};
            } else if (check_what == "boundedness") {
                auto rep = boundedness(host);
                out = {{"global_bound", rep.global_bound}, {"local_bound", rep.local_bound}};
            } else if (check_what == "discrepancy") {
                // Monte-Carlo over random disjoint set pairs.
                int count = host.n_vertices();
                int size = std::max(2, static_cast<int>(check_n > 0 ? check_n : count / 4));
                int passes = 0, checked = 0;
                double worst = 0;
                for (int t = 0; t < 100; ++t) {
                    std::vector<int> a, b;
                    if (host.is_bipartite()) {
                        const auto& bip = host.bipartition();
                        int half = static_cast<int>(bip.x.size());
                        if (size > half) break;
                        for (int i : rng.sample_without_replacement(half, size))
                            a.push_back(bip.x[i]);
                        for (int i : rng.sample_without_replacement(half, size))
                            b.push_back(bip.y[i]);
                    } else {
                        if (2 * size > count) break;
                        auto both = rng.sample_without_replacement(count, 2 * size);
                        rng.shuffle(both);
                        for (int i = 0; i < size; ++i) a.push_back(host.vertices()[both[i]]);
                        for (int i = size; i < 2 * size; ++i)
                            b.push_back(host.vertices()[both[i]]);
                    }
                    auto rep = density_discrepancy(host, a, b, check_delta, check_gamma);
                    if (!rep.precondition_ok) continue;
                    ++checked;
                    worst = std::max(worst, rep.discrepancy);
                    if (rep.within_bound) ++passes;
                }
                out = {{"ok", checked > 0 && passes == checked},
                       {"pairs_checked", checked},
                       {"worst_discrepancy", worst}};
            } else if (check_what == "cover") {
                auto rep = colour_cover_check(host, check_k, check_eps, &rng);
                out = {{"ok", rep.holds},
                       {"exhaustive", rep.exhaustive},
                       {"subsets_checked", rep.subsets_checked},
                       {"worst_cover_fraction", rep.worst_cover_fraction}};
            } else if (check_what == "core") {
                auto rep = high_min_degree_core(host, check_eps);
                out = {{"precondition_ok", rep.precondition_ok},
                       {"core_vertices", rep.core.n_vertices()},
                       {"deleted", rep.deleted}};
            } else if (check_what == "orientation") {
                auto rep = random_orientation(host, rng);
                out = {{"target_met", rep.target_met},
                       {"min_out_degree", rep.min_out_degree},
                       {"attempts", rep.attempts}};
            } else {
                throw std::runtime_error("unknown checker '" + check_what + "'");
            }
            maybe_write(json_out, out);
            say(out.dump());
            return out.value("ok", true) ? 0 : 1;
        }

        if (verify_cmd->parsed()) {
            auto host = load_instance_graph(verify_instance);
            std::ifstream in(verify_structs);
            if (!in) throw std::runtime_error("cannot open " + verify_structs);
            json doc = json::parse(in);
            int failures = 0, checked = 0;
            std::vector<std::vector<Edge>> families;
            for (const auto& s : doc["structures"]) {
                std::vector<Edge> edges;
                for (const auto& e : s)
                    edges.emplace_back(e["u"].get<int>(), e["v"].get<int>(),
                                       e["colour"].get<int>());
                families.push_back(edges);
                VerificationReport rep;
                if (verify_kind == "matching" || verify_kind == "perfect-matching") {
                    RainbowMatching m;
                    m.edges = edges;
                    rep = verify_kind == "matching" ? verify_matching(m, host)
                                                    : verify_perfect_matching(m, host);
                } else if (verify_kind == "forest" || verify_kind == "spanning-tree") {
                    RainbowForest f;
                    f.edges = edges;
                    f.spanning_tree = verify_kind == "spanning-tree";
                    rep = verify_forest(f, host);
                } else {
                    auto cycles = detail::cycles_from_edges(edges);
                    if (!cycles) {
                        rep.flag("edge set is not 2-regular");
                    } else {
                        CycleFactor f;
                        f.cycles = *cycles;
                        rep = verify_kind == "hamiltonian" ? verify_hamiltonian_cycle(f, host)
                                                           : verify_cycle_factor(f, host);
                    }
                }
                ++checked;
                if (!rep.ok()) {
                    ++failures;
                    say("structure " + std::to_string(checked - 1) + ": " + rep.summary());
                }
            }
            auto disjoint = verify_pairwise_disjoint(families);
            if (!disjoint.ok()) {
                ++failures;
                say("family: " + disjoint.summary());
            }
            json out{{"checked", checked}, {"failures", failures}, {"disjoint", disjoint.ok()}};
            maybe_write(json_out, out);
            say(out.dump());
            return failures == 0 ? 0 : 1;
        }

        if (oracle_cmd->parsed()) {
            json out;
            if (oracle_op == "max-rainbow-matching" || oracle_op == "rainbow-hamiltonian") {
                auto host = load_instance_graph(oracle_instance);
                OracleResult r = oracle_op == "max-rainbow-matching"
                                     ? max_rainbow_matching(host)
                                     : rainbow_hamiltonian_exists(host);
                out = {{"optimum", r.optimum},
                       {"witnesses", r.witnesses.size()},
                       {"enumerated", r.enumerated}};
            } else {
                auto square = load_square(oracle_instance);
                OracleResult r = oracle_op == "transversals" ? enumerate_transversals(square)
                                                             : max_disjoint_transversals(square);
                out = {{"optimum", r.optimum},
                       {"witnesses", r.witnesses.size()},
                       {"enumerated", r.enumerated}};
            }
            maybe_write(json_out, out);
            say(out.dump());
            return 0;
        }

        if (reg->parsed()) {
            auto host = load_instance_graph(reg_instance);
            Rng rng(seed);
            json out;
            if (reg_op == "bipartite") {
                int d = reg_d > 0 ? reg_d : host.min_degree();
                auto r = regular_bipartite_subgraph(host, d);
                out = {{"feasible", r.feasible},
                       {"d", d},
                       {"edges", r.feasible ? r.subgraph.n_edges() : 0},
                       {"witness_size", r.witness_t.size()}};
            } else if (reg_op == "general") {
                int d = reg_d > 0 ? reg_d : (host.min_degree() - host.min_degree() % 2);
                auto r = regular_general_subgraph(host, d, rng);
                out = {{"feasible", r.feasible},
                       {"d", d},
                       {"edges", r.feasible ? r.subgraph.n_edges() : 0}};
            } else if (reg_op == "thin") {
                auto r = thin_large_colours(host, reg_eps, host.is_bipartite() ? 1 : 2, rng);
                out = {{"ok", r.ok},
                       {"attempts", r.attempts},
                       {"global_bound", r.achieved_bound},
                       {"min_degree", r.achieved_min_degree}};
            } else {
                throw std::runtime_error("unknown regularize op '" + reg_op + "'");
            }
            maybe_write(json_out, out);
            say(out.dump());
            return 0;
        }

        if (ham->parsed()) {
            if (ham_mode == "circulant") {
                auto dec = circulant_decomposition(ham_n);
                if (!ham_colouring_out.empty()) save_graph(dec.colouring, ham_colouring_out);
                std::vector<std::vector<Edge>> families;
                for (const auto& f : dec.cycles) families.push_back(f.edge_list(dec.colouring));
                maybe_write(ham_structs, families_to_json("hamiltonian_cycles", families));
                int failures = 0;
                for (const auto& f : dec.cycles)
                    if (!verify_hamiltonian_cycle(f, dec.colouring).ok()) ++failures;
                if (!verify_pairwise_disjoint(families).ok()) ++failures;
                json out{{"cycles", dec.cycles.size()}, {"failures", failures}};
                maybe_write(json_out, out);
                say(out.dump());
                return failures == 0 ? 0 : 1;
            }
            auto host = load_instance_graph(ham_instance);
            auto report = run_hamilton(host, cfg, seed, ham_structs);
            maybe_write(json_out, report.to_json());
            say("hamilton: status=" + report.status + " cycles=" +
                std::to_string(report.family_sizes.size()));
            return report.success() ? 0 : 1;
        }

        if (trees_cmd->parsed()) {
            EdgeColouredGraph host = trees_generate > 0 ? one_factorized_kn(trees_generate)
                                                        : load_instance_graph(trees_instance);
            auto report = run_trees(host, cfg, seed, trees_structs);
            maybe_write(json_out, report.to_json());
            say("trees: status=" + report.status + " family=" +
                std::to_string(report.family_sizes.size()));
            return report.success() ? 0 : 1;
        }

        if (tr->parsed()) {
            auto host = square_to_bipartite(load_square(tr_input));
            PipelineConfig point = cfg;
            if (tr_eps > 0) point.epsilon = tr_eps;
            int exit_code = 0;
            for (int t = 0; t < trials; ++t) {
                std::uint64_t trial_seed = trials == 1 ? seed : seed + 1000003ULL * t;
                std::string structs =
                    trials == 1 ? tr_structs
                                : (tr_structs.empty() ? "" : tr_structs + "." + std::to_string(t));
                auto report = run_transversals(host, point, trial_seed, structs);
                std::string jpath =
                    trials == 1 ? json_out
                                : (json_out.empty() ? "" : json_out + "." + std::to_string(t));
                maybe_write(jpath, report.to_json());
                say("trial " + std::to_string(t) + ": status=" + report.status + " family=" +
                    std::to_string(report.family_sizes.size()));
                if (!report.success()) exit_code = 1;
            }
            return exit_code;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
