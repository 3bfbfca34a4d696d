// Acceptance suite: one line per criterion, run at the stated tolerances.
// Exit code counts unexpected failures; a criterion whose instance is
// combinatorially infeasible (see the line it prints) still prints FAIL but
// is not counted as unexpected.

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <iostream>
#include <set>
#include <sstream>
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

struct Outcome {
    bool pass = false;
    bool expected_fail = false;  // documented infeasible instance
    std::string detail;
};

// ---- 1. Circulant exactness: primes 3..101, tolerance 0 ----
Outcome criterion_circulant() {
    Outcome out;
    Stopwatch watch;
    for (int p = 3; p <= 101; ++p) {
        if (!is_prime(p)) continue;
        auto dec = circulant_decomposition(p);
        if (static_cast<int>(dec.cycles.size()) != (p - 1) / 2) {
            out.detail = "wrong cycle count at p=" + std::to_string(p);
            return out;
        }
        std::vector<std::vector<Edge>> families;
        long long covered = 0;
        for (const auto& f : dec.cycles) {
            if (!verify_hamiltonian_cycle(f, dec.colouring).ok()) {
                out.detail = "invalid cycle at p=" + std::to_string(p);
                return out;
            }
            families.push_back(f.edge_list(dec.colouring));
            covered += static_cast<long long>(families.back().size());
        }
        if (!verify_pairwise_disjoint(families).ok() ||
            covered != static_cast<long long>(p) * (p - 1) / 2) {
            out.detail = "not an exact decomposition at p=" + std::to_string(p);
            return out;
        }
    }
    out.pass = true;
    std::ostringstream ss;
    ss << "all primes 3..101 exact in " << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    return out;
}

// ---- 2. Oracle equivalence on squares with n <= 5 ----
Outcome criterion_oracle_equivalence() {
    Outcome out;
    Stopwatch watch;
    std::vector<GeneralizedLatinSquare> corpus;
    for (int n : {2, 3, 4}) corpus.push_back(GeneralizedLatinSquare::cyclic(n));
    Rng gen(7202);
    for (int i = 0; i < 500; ++i) {
        int n = 1 + gen.index(5);
        int symbols = n + gen.index(n * n - n + 1);
        corpus.push_back(random_generalized_square(n, symbols, gen));
    }
    long long emitted = 0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& square = corpus[i];
        auto host = square_to_bipartite(square);
        Rng rng = Rng::stream(9091, i);
        TransversalPipelineResult res;
        try {
            res = knn_transversal_pipeline(host, 0.01, rng);
        } catch (const std::exception& ex) {
            out.detail = "pipeline error on instance " + std::to_string(i) + ": " + ex.what();
            return out;
        }
        if (!res.hypothesis_ok) continue;
        auto witnesses = enumerate_transversals(square);
        auto best = max_disjoint_transversals(square);
        if (static_cast<long long>(res.family.matchings.size()) > best.optimum) {
            out.detail = "family beats the oracle optimum on instance " + std::to_string(i);
            return out;
        }
        std::set<std::vector<Edge>> universe;
        for (auto w : witnesses.witnesses) {
            std::sort(w.begin(), w.end());
            universe.insert(w);
        }
        for (const auto& m : res.family.matchings) {
            auto sorted = m.edges;
            std::sort(sorted.begin(), sorted.end());
            if (!universe.count(sorted)) {
                out.detail = "emitted transversal outside the witness set on instance " +
                             std::to_string(i);
                return out;
            }
            ++emitted;
        }
        if (!verify_pairwise_disjoint(edge_lists(res.family.matchings)).ok()) {
            out.detail = "family not disjoint on instance " + std::to_string(i);
            return out;
        }
    }
    out.pass = true;
    std::ostringstream ss;
    ss << corpus.size() << " instances, " << emitted << " transversals all in witness sets, "
       << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    return out;
}

// ---- 3. Nibble validity and size on K_{256,256} ----
Outcome criterion_nibble() {
    Outcome out;
    Stopwatch watch;
    auto host = one_factorized_knn(256);
    const int seeds = 100;
    double total_size = 0;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = Rng::stream(30303, s);
        NibbleConfig cfg;
        cfg.alpha = 0.05;
        cfg.p = 0.1;
        auto res = near_perfect_rainbow_matching(host, cfg, rng);
        if (!verify_matching(res.matching, host).ok()) {
            out.detail = "invalid matching at seed " + std::to_string(s);
            return out;
        }
        if (!res.trajectory.conservation_ok) {
            out.detail = "conservation identity failed at seed " + std::to_string(s);
            return out;
        }
        total_size += res.matching.size();
    }
    double mean = total_size / seeds;
    if (mean < 0.85 * 256) {
        std::ostringstream ss;
        ss << "mean size " << mean << " below 0.85 n = " << 0.85 * 256;
        out.detail = ss.str();
        return out;
    }
    out.pass = true;
    std::ostringstream ss;
    ss << seeds << " seeds all valid, mean size " << mean << " >= " << 0.85 * 256 << ", "
       << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    return out;
}

// ---- 4. Edge-inclusion floor on K_{64,64} ----
Outcome criterion_edge_inclusion() {
    Outcome out;
    Stopwatch watch;
    int n = 64;
    auto host = one_factorized_knn(n);
    const int seeds = 2000;
    std::unordered_map<std::uint64_t, int> hits;
    for (const Edge& e : host.edges()) hits[pair_key(e.u, e.v)] = 0;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = Rng::stream(40404, s);
        NibbleConfig cfg;
        cfg.alpha = 0.05;
        cfg.p = 0.1;
        auto res = near_perfect_rainbow_matching(host, cfg, rng);
        for (const Edge& e : res.matching.edges) ++hits[pair_key(e.u, e.v)];
    }
    double floor = 0.2 / n;
    int good = 0;
    for (const auto& [k, c] : hits)
        if (static_cast<double>(c) / seeds >= floor) ++good;
    double fraction = static_cast<double>(good) / host.n_edges();
    std::ostringstream ss;
    ss << fraction * 100 << "% of edges at or above 0.2/n over " << seeds << " seeds, "
       << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    out.pass = fraction >= 0.99;
    return out;
}

// ---- 5. Completion success on synthetic near-perfect matchings ----
Outcome criterion_completion() {
    Outcome out;
    Stopwatch watch;
    int n = 200;
    const int seeds = 100;
    int successes = 0;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = Rng::stream(50505, s);
        auto square = random_generalized_square(n, (7 * n * n) / 10, rng);
        auto host = square_to_bipartite(square);
        // A perfect rainbow matching by augmentation, trimmed to 0.98 n.
        RainbowMatching m0;
        while (m0.size() < n && rainbow_augment(m0, host, host.bipartition().x, rng, 6)) {
        }
        if (m0.size() < n) continue;  // host resample would be needed; count as failure
        rng.shuffle(m0.edges);
        m0.edges.resize(n - 4);
        // Colour-sampled reserves at total density 0.3 from the complement.
        std::unordered_set<int> used_colours;
        for (const Edge& e : m0.edges) used_colours.insert(e.colour);
        std::unordered_set<std::uint64_t> m0_keys;
        for (const Edge& e : m0.edges) m0_keys.insert(pair_key(e.u, e.v));
        std::unordered_map<int, int> share;  // colour -> reserve index
        for (const auto& [c, cls] : host.colour_classes()) {
            if (used_colours.count(c)) continue;
            double r = rng.real01();
            if (r < 0.1)
                share[c] = 0;
            else if (r < 0.2)
                share[c] = 1;
            else if (r < 0.3)
                share[c] = 2;
        }
        std::vector<Edge> re, rdx, rdy;
        for (const Edge& e : host.edges()) {
            if (m0_keys.count(pair_key(e.u, e.v))) continue;
            auto it = share.find(e.colour);
            if (it == share.end()) continue;
            (it->second == 0 ? re : it->second == 1 ? rdx : rdy).push_back(e);
        }
        auto ge = EdgeColouredGraph::bipartite(n, re);
        auto gdx = EdgeColouredGraph::bipartite(n, rdx);
        auto gdy = EdgeColouredGraph::bipartite(n, rdy);
        auto res = complete_matching(m0, ge, gdx, gdy);
        if (!res.ok) continue;
        if (!verify_perfect_matching(res.matching, host).ok()) continue;
        if (res.edges_from_e > 4 || res.edges_from_dx > 4 || res.edges_from_dy > 4) continue;
        ++successes;
    }
    std::ostringstream ss;
    ss << successes << "/" << seeds << " completions verified perfect, "
       << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    out.pass = successes >= 95;
    return out;
}

// ---- 6. Transversal pipeline on n=100 squares ----
Outcome criterion_transversal_pipeline() {
    Outcome out;
    Stopwatch watch;
    int n = 100;
    const int seeds = 10;
    int worst = n;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = Rng::stream(60606, s);
        auto square = random_generalized_square(n, n * n / 2, rng);
        auto host = square_to_bipartite(square);
        auto res = knn_transversal_pipeline(host, 0.0125, rng);
        if (!res.hypothesis_ok) {
            out.detail = "gate rejected seed " + std::to_string(s);
            return out;
        }
        for (const auto& m : res.family.matchings)
            if (!verify_perfect_matching(m, host).ok()) {
                out.detail = "invalid transversal at seed " + std::to_string(s);
                return out;
            }
        if (!verify_pairwise_disjoint(edge_lists(res.family.matchings)).ok()) {
            out.detail = "family not disjoint at seed " + std::to_string(s);
            return out;
        }
        worst = std::min(worst, static_cast<int>(res.family.matchings.size()));
    }
    std::ostringstream ss;
    ss << "min family size " << worst << " (target >= " << n / 2 << ") over " << seeds
       << " seeds, " << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    out.pass = worst >= n / 2;
    return out;
}

// ---- 7. Regularization exactness ----
Outcome criterion_regularization() {
    Outcome out;
    Stopwatch watch;
    Rng rng(70707);
    // 1000 feasible degree pairs read off random bipartite graphs.
    for (int i = 0; i < 1000; ++i) {
        int m = 1 + rng.index(30), n = 1 + rng.index(30);
        double density = 0.1 + 0.8 * rng.real01();
        std::vector<int> dx(m, 0), dy(n, 0);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < n; ++b)
                if (rng.bernoulli(density)) {
                    ++dx[a];
                    ++dy[b];
                }
        DegreeSequencePair pair{dx, dy};
        auto res = gale_ryser_realize(pair);
        if (!res.feasible) {
            out.detail = "feasible pair declared infeasible at instance " + std::to_string(i);
            return out;
        }
        std::vector<int> gx(m, 0), gy(n, 0);
        for (auto [x, y] : res.edges) {
            ++gx[x];
            ++gy[y];
        }
        if (gx != dx || gy != dy) {
            out.detail = "realization missed the degrees at instance " + std::to_string(i);
            return out;
        }
    }
    // 1000 constructed infeasible pairs: one x-vertex with all the degree,
    // some y-demand above 1.
    for (int i = 0; i < 1000; ++i) {
        int n = 2 + rng.index(29);
        std::vector<int> dy(n, 0);
        int total = 0;
        for (int j = 0; j < n; ++j) {
            dy[j] = rng.index(4);
            total += dy[j];
        }
        if (*std::max_element(dy.begin(), dy.end()) < 2) {
            dy[0] += 2;
            total += 2;
        }
        if (total == 0) {
            dy[0] = 2;
            total = 2;
        }
        std::vector<int> dx(1 + rng.index(5), 0);
        dx[0] = total;
        auto res = gale_ryser_realize({dx, dy});
        if (res.feasible) {
            out.detail = "infeasible pair declared feasible at instance " + std::to_string(i);
            return out;
        }
    }
    // Exact d-regular extraction on dense random bipartite hosts.
    int n = 100, d = 90;
    for (int i = 0; i < 20; ++i) {
        std::vector<Edge> edges;
        std::vector<int> deg_x(n, 0), deg_y(n, 0);
        int colour = 0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (!rng.bernoulli(0.01)) edges.emplace_back(a, n + b, colour++);
        auto g = EdgeColouredGraph::bipartite(n, edges);
        if (g.min_degree() < 95) {
            --i;
            continue;
        }
        auto res = regular_bipartite_subgraph(g, d);
        if (!res.feasible) {
            out.detail = "extraction failed on dense instance " + std::to_string(i);
            return out;
        }
        for (int v : res.subgraph.vertices())
            if (res.subgraph.degree(v) != d) {
                out.detail = "extraction not degree-exact on instance " + std::to_string(i);
                return out;
            }
    }
    out.pass = true;
    std::ostringstream ss;
    ss << "1000 feasible realized, 1000 infeasible certified, 20 dense extractions exact, "
       << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    return out;
}

// ---- 8. 2-factor / Hamiltonian pipeline on K_120 minus 10 classes ----
Outcome criterion_two_factor() {
    Outcome out;
    Stopwatch watch;
    int n = 120;
    auto host = delete_colour_classes(one_factorized_kn(n), 10);
    const int seeds = 5;
    int worst_factors = n, worst_cycles = n;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = Rng::stream(80808, s);
        HamiltonianPipelineConfig cfg;
        cfg.two_factor.k = 5;
        cfg.assume_bounded = true;  // run the machinery regardless of the census
        auto res = hamiltonian_decomposition(host, 0.09, rng, cfg);
        // Count verified rainbow 2-factors among the built factors.
        int factors_ok = 0;
        // Re-derive the factors for verification through the same config.
        // (hamiltonian_decomposition already verified cycles; factors are
        // checked here against the host.)
        Rng rng2 = Rng::stream(80808, s);
        auto [j1, rest1] = sample_colour_subgraph(host, cfg.companion_fraction, rng2);
        auto [j2, base] = sample_colour_subgraph(
            rest1, cfg.companion_fraction / (1.0 - cfg.companion_fraction), rng2);
        auto factors = two_factor_decomposition(base, j1, cfg.two_factor, rng2);
        for (std::size_t i = 0; i < factors.factors.size(); ++i)
            if (verify_cycle_factor(factors.factors[i], host, true, 5).ok()) ++factors_ok;
        worst_factors = std::min(worst_factors, factors_ok);
        worst_cycles = std::min(worst_cycles, static_cast<int>(res.cycles.size()));
    }
    // The same machinery on the nearest feasible variant (the ten classes
    // shattered into unique colours instead of deleted), for the record.
    int demo_factors = 0, demo_cycles = 0;
    {
        auto rr = one_factorized_kn(n);
        std::vector<int> ids;
        for (const auto& [c, cls] : rr.colour_classes()) ids.push_back(c);
        std::sort(ids.rbegin(), ids.rend());
        std::unordered_set<int> shatter(ids.begin(), ids.begin() + 10);
        int fresh = rr.max_colour_id() + 1;
        std::vector<Edge> es;
        for (const Edge& e : rr.edges())
            es.emplace_back(e.u, e.v, shatter.count(e.colour) ? fresh++ : e.colour);
        EdgeColouredGraph feasible(n, es);
        Rng rng = Rng::stream(81818, 0);
        HamiltonianPipelineConfig cfg;
        cfg.two_factor.k = 5;
        cfg.two_factor.partition_retries = 12;
        cfg.assume_bounded = true;
        Rng rng2 = Rng::stream(81818, 0);
        auto [j1, rest1] = sample_colour_subgraph(feasible, cfg.companion_fraction, rng2);
        auto [j2, base] = sample_colour_subgraph(
            rest1, cfg.companion_fraction / (1.0 - cfg.companion_fraction), rng2);
        auto factors = two_factor_decomposition(base, j1, cfg.two_factor, rng2);
        for (std::size_t i = 0; i < factors.factors.size(); ++i)
            if (verify_cycle_factor(factors.factors[i], feasible, true, 5).ok()) ++demo_factors;
        auto res = hamiltonian_decomposition(feasible, 0.09, rng, cfg);
        demo_cycles = static_cast<int>(res.cycles.size());
    }
    std::ostringstream ss;
    ss << "min verified 2-factors " << worst_factors << " (target >= " << (3 * n) / 20
       << "), min Hamiltonian cycles " << worst_cycles << " (target >= " << n / 10 << "), "
       << static_cast<int>(watch.ms())
       << " ms [instance infeasible: 109 colours < 120 edges of any spanning rainbow "
          "2-factor; see decisions ledger. Feasible variant (classes shattered, not "
          "deleted): "
       << demo_factors << " verified 2-factors, " << demo_cycles << " Hamiltonian cycles]";
    out.detail = ss.str();
    out.pass = worst_factors >= (3 * n) / 20 && worst_cycles >= n / 10;
    out.expected_fail = !out.pass;
    return out;
}

// ---- 9. Spanning trees on round-robin K_50 ----
Outcome criterion_trees() {
    Outcome out;
    Stopwatch watch;
    int n = 50;
    auto host = one_factorized_kn(n);
    const int seeds = 5;
    int worst = n;
    for (int s = 0; s < seeds; ++s) {
        Rng rng = Rng::stream(90909, s);
        TreePipelineConfig cfg;
        cfg.hamilton.two_factor.k = 4;
        cfg.hamilton.companion_fraction = 0.02;
        cfg.hamilton.completion_retries = 8;
        cfg.hamilton.two_factor.partition_retries = 20;
        auto res = spanning_tree_decomposition(host, 0.1, rng, cfg);
        if (res.invariant_violations > 0) {
            out.detail = "bookkeeping invariant violated at seed " + std::to_string(s);
            return out;
        }
        for (const auto& t : res.trees)
            if (!verify_forest(t, host).ok()) {
                out.detail = "invalid tree at seed " + std::to_string(s);
                return out;
            }
        if (!verify_pairwise_disjoint(res.tree_edges).ok()) {
            out.detail = "trees not edge-disjoint at seed " + std::to_string(s);
            return out;
        }
        worst = std::min(worst, static_cast<int>(res.trees.size()));
    }
    std::ostringstream ss;
    int target = static_cast<int>(0.3 * n / 2 + 0.999);
    ss << "min family size " << worst << " (target >= " << target << ") over " << seeds
       << " seeds, zero invariant violations, " << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    out.pass = worst >= target;
    return out;
}

// ---- 10. Determinism: byte-identical structure files ----
Outcome criterion_determinism() {
    Outcome out;
    Stopwatch watch;
    auto snapshot = [&]() {
        std::ostringstream blob;
        {
            Rng gen(1234);
            auto square = random_generalized_square(40, 800, gen);
            auto host = square_to_bipartite(square);
            Rng rng(42);
            auto res = knn_transversal_pipeline(host, 0.0125, rng);
            json fams = json::array();
            for (const auto& m : res.family.matchings) fams.push_back(edges_to_json(m.edges));
            blob << fams.dump();
        }
        {
            auto host = one_factorized_knn(48);
            Rng rng(43);
            NibbleConfig cfg;
            auto res = near_perfect_rainbow_matching(host, cfg, rng);
            blob << edges_to_json(res.matching.edges).dump();
        }
        {
            int next = 0;
            std::vector<Edge> es;
            for (int i = 0; i < 24; ++i)
                for (int j = i + 1; j < 24; ++j) es.emplace_back(i, j, next++);
            EdgeColouredGraph host(24, es);
            Rng rng(44);
            HamiltonianPipelineConfig cfg;
            cfg.two_factor.k = 3;
            auto res = hamiltonian_decomposition(host, 0.3, rng, cfg);
            for (const auto& ce : res.cycle_edges) blob << edges_to_json(ce).dump();
        }
        {
            auto host = one_factorized_kn(30);
            Rng rng(45);
            TreePipelineConfig cfg;
            cfg.hamilton.two_factor.k = 3;
            cfg.hamilton.companion_fraction = 0.05;
            auto res = spanning_tree_decomposition(host, 0.1, rng, cfg);
            for (const auto& te : res.tree_edges) blob << edges_to_json(te).dump();
        }
        return blob.str();
    };
    std::string a = snapshot();
    std::string b = snapshot();
    if (a != b) {
        out.detail = "re-run produced different structure bytes";
        return out;
    }
    out.pass = true;
    std::ostringstream ss;
    ss << "transversals+nibble+hamilton+trees byte-identical across re-runs (" << a.size()
       << " bytes), " << static_cast<int>(watch.ms()) << " ms";
    out.detail = ss.str();
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    int only = argc > 1 ? std::atoi(argv[1]) : 0;
    struct Entry {
        int id;
        const char* name;
        Outcome (*fn)();
    };
    std::vector<Entry> entries{
        {1, "circulant exactness", criterion_circulant},
        {2, "oracle equivalence", criterion_oracle_equivalence},
        {3, "nibble validity and size", criterion_nibble},
        {4, "edge-inclusion floor", criterion_edge_inclusion},
        {5, "completion success", criterion_completion},
        {6, "transversal pipeline", criterion_transversal_pipeline},
        {7, "regularization exactness", criterion_regularization},
        {8, "2-factor/Hamiltonian pipeline", criterion_two_factor},
        {9, "spanning trees", criterion_trees},
        {10, "determinism", criterion_determinism},
    };
    int unexpected = 0;
    for (const auto& e : entries) {
        if (only != 0 && e.id != only) continue;
        Outcome out;
        try {
            out = e.fn();
        } catch (const std::exception& ex) {
            out.detail = std::string("exception: ") + ex.what();
        }
        std::printf("criterion %2d (%s): %s — %s\n", e.id, e.name, out.pass ? "PASS" : "FAIL",
                    out.detail.c_str());
        std::fflush(stdout);
        if (!out.pass && !out.expected_fail) ++unexpected;
    }
    return unexpected;
}
