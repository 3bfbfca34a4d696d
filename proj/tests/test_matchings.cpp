#include <catch2/catch_amalgamated.hpp>

#include "rainbow/generate.hpp"
#include "rainbow/matchings.hpp"
#include "rainbow/oracle.hpp"
#include "rainbow/rng.hpp"

using namespace rainbow;

namespace {

// Complete bipartite host where every edge has its own colour.
EdgeColouredGraph rainbow_knn(int n) {
    int next = 0;
    return complete_bipartite(n, [&](int, int) { return next++; });
}

}  // namespace

TEST_CASE("extend_matching_once succeeds with complete reserves") {
    int n = 4;
    auto host = rainbow_knn(n);
    // M covers x0..x2 / y0..y2 diagonally; x3, y3 are uncovered.
    RainbowMatching m;
    for (int i = 0; i < 3; ++i) m.edges.emplace_back(i, n + i, host.colour_of(i, n + i));
    // Reserves: three colour-disjoint copies living on fresh colour ids.
    int base = 100;
    std::vector<Edge> ee, dxe, dye;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            ee.emplace_back(i, n + j, base + i * n + j);
            dxe.emplace_back(i, n + j, base + 100 + i * n + j);
            dye.emplace_back(i, n + j, base + 200 + i * n + j);
        }
    auto re = EdgeColouredGraph::bipartite(n, ee);
    auto rdx = EdgeColouredGraph::bipartite(n, dxe);
    auto rdy = EdgeColouredGraph::bipartite(n, dye);
    auto grown = extend_matching_once(m, re, rdx, rdy, 3, n + 3);
    REQUIRE(grown.has_value());
    REQUIRE(grown->size() == 4);
    VerificationReport rep;
    detail::check_vertex_disjoint(grown->edges, rep);
    detail::check_rainbow(grown->edges, rep);
    REQUIRE(rep.ok());
}

TEST_CASE("extend_matching_once reports the bottleneck") {
    int n = 2;
    auto host = rainbow_knn(n);
    RainbowMatching m;
    m.edges.emplace_back(0, n + 0, host.colour_of(0, n));
    auto empty = EdgeColouredGraph::bipartite(n, {});
    RotationFailure why;
    auto grown = extend_matching_once(m, empty, empty, empty, 1, n + 1, &why);
    REQUIRE_FALSE(grown.has_value());
    REQUIRE(why == RotationFailure::EmptyNeighbourhood);

    // D_X, D_Y present but no E edge.
    std::vector<Edge> dxe{{1, 2, 50}};   // x1 - y0
    std::vector<Edge> dye{{0, 3, 60}};   // x0 - y1
    auto rdx = EdgeColouredGraph::bipartite(n, dxe);
    auto rdy = EdgeColouredGraph::bipartite(n, dye);
    auto g2 = extend_matching_once(m, empty, rdx, rdy, 1, n + 1, &why);
    REQUIRE_FALSE(g2.has_value());
    REQUIRE(why == RotationFailure::NoLinkingEdge);
}

TEST_CASE("extend_matching_once finds the unique admissible rotation") {
    // 4+4 instance engineered so exactly one (u, v, m_u, m_v) quadruple works.
    int n = 4;
    RainbowMatching m;
    m.edges = {{0, 4, 0}, {1, 5, 1}, {2, 6, 2}};  // x3, y3 free
    std::vector<Edge> dxe{{3, 4, 10}};            // x3 - y0 (m_u = y0, u = x0)
    std::vector<Edge> dye{{1, 7, 11}};            // y3 - x1 (m_v = x1, v = y1)
    std::vector<Edge> ee{{0, 5, 12}};             // u v = x0 - y1
    auto rdx = EdgeColouredGraph::bipartite(n, dxe);
    auto rdy = EdgeColouredGraph::bipartite(n, dye);
    auto re = EdgeColouredGraph::bipartite(n, ee);
    auto grown = extend_matching_once(m, re, rdx, rdy, 3, 7);
    REQUIRE(grown.has_value());
    std::vector<Edge> want{{0, 5, 12}, {2, 6, 2}, {3, 4, 10}, {1, 7, 11}};
    std::sort(want.begin(), want.end());
    auto got = grown->edges;
    std::sort(got.begin(), got.end());
    REQUIRE(got == want);
}

TEST_CASE("complete_matching finishes an already perfect matching") {
    int n = 3;
    auto host = rainbow_knn(n);
    RainbowMatching m;
    for (int i = 0; i < n; ++i) m.edges.emplace_back(i, n + i, host.colour_of(i, n + i));
    auto empty = EdgeColouredGraph::bipartite(n, {});
    auto res = complete_matching(m, empty, empty, empty);
    REQUIRE(res.ok);
    REQUIRE(res.rotations == 0);
    REQUIRE(res.matching.edges == m.edges);
}

TEST_CASE("complete_matching rejects colour-sharing reserves") {
    int n = 2;
    RainbowMatching m;
    m.edges = {{0, 2, 0}};
    std::vector<Edge> bad{{1, 3, 0}};  // same colour 0
    auto clash = EdgeColouredGraph::bipartite(n, bad);
    auto empty = EdgeColouredGraph::bipartite(n, {});
    REQUIRE_THROWS_AS(complete_matching(m, clash, empty, empty), std::invalid_argument);
}

TEST_CASE("complete_matching closes small gaps with sampled reserves") {
    Rng rng(101);
    int n = 60;
    auto host = rainbow_knn(n);
    // Near-perfect matching: diagonal minus two cells.
    RainbowMatching m;
    for (int i = 0; i < n - 2; ++i) m.edges.emplace_back(i, n + i, host.colour_of(i, n + i));
    // Reserves from off-diagonal edges, colour-split three ways.
    std::vector<Edge> ee, dxe, dye;
    for (const Edge& e : host.edges()) {
        if (e.v - n == e.u) continue;  // diagonal stays out of the reserves
        double r = rng.real01();
        if (r < 0.2)
            ee.push_back(e);
        else if (r < 0.4)
            dxe.push_back(e);
        else if (r < 0.6)
            dye.push_back(e);
    }
    auto re = EdgeColouredGraph::bipartite(n, ee);
    auto rdx = EdgeColouredGraph::bipartite(n, dxe);
    auto rdy = EdgeColouredGraph::bipartite(n, dye);
    auto res = complete_matching(m, re, rdx, rdy);
    REQUIRE(res.ok);
    REQUIRE(verify_perfect_matching(res.matching, host).ok());
    REQUIRE(res.edges_from_e <= 2);
    REQUIRE(res.edges_from_dx <= 2);
    REQUIRE(res.edges_from_dy <= 2);
    // Unmoved edges of M0 survive: each rotation removes at most two.
    int kept = 0;
    for (const Edge& e : res.matching.edges)
        if (e.u < n && e.v - n == e.u) ++kept;
    REQUIRE(kept >= n - 2 - 2 * 2);
}

TEST_CASE("rainbow_augment grows matchings in a rainbow pool") {
    Rng rng(7);
    int n = 12;
    auto host = rainbow_knn(n);
    RainbowMatching m;
    while (rainbow_augment(m, host, host.bipartition().x, rng)) {
    }
    REQUIRE(m.size() == n);
    REQUIRE(verify_perfect_matching(m, host).ok());
}

TEST_CASE("near_matching_decomposition on K_{2,2} with two colours") {
    auto g = one_factorized_knn(2);
    MatchingPipelineConfig cfg;
    cfg.alpha = 0.5;
    cfg.reserve_fraction = 0.0;
    cfg.stop_fraction = 0.0;
    Rng rng(3);
    auto fam = near_matching_decomposition(g, cfg, rng);
    REQUIRE(fam.matchings.size() >= 1);
    for (const auto& m : fam.matchings) REQUIRE(verify(m, g).ok());
    REQUIRE(verify_pairwise_disjoint(edge_lists(fam.matchings)).ok());
}

TEST_CASE("near_matching_decomposition on the empty graph") {
    auto g = EdgeColouredGraph::bipartite(3, {});
    MatchingPipelineConfig cfg;
    Rng rng(4);
    auto fam = near_matching_decomposition(g, cfg, rng);
    REQUIRE(fam.matchings.empty());
}

TEST_CASE("near_matching_decomposition emits disjoint rainbow matchings without dummies") {
    // Host with real boundedness slack: many small colour classes.
    Rng rng(5);
    auto square = random_generalized_square(40, 600, rng);
    auto g = square_to_bipartite(square);
    MatchingPipelineConfig cfg;
    auto fam = near_matching_decomposition(g, cfg, rng);
    REQUIRE(fam.matchings.size() >= 20);
    for (const auto& m : fam.matchings) {
        REQUIRE(verify(m, g).ok());  // host check also rejects dummy colours
        for (const Edge& e : m.edges) REQUIRE(e.colour < fam.dummy_threshold);
    }
    REQUIRE(verify_pairwise_disjoint(edge_lists(fam.matchings)).ok());
    // Sizes should be near-perfect for most matchings.
    int big = 0;
    for (const auto& m : fam.matchings)
        if (m.size() >= 30) ++big;
    REQUIRE(big >= static_cast<int>(fam.matchings.size() * 0.6));
}

TEST_CASE("spread_out is a fixed point on balanced families") {
    auto g = one_factorized_knn(6);
    MatchingFamily fam;
    for (const auto& [c, cls] : g.colour_classes()) {
        RainbowMatching m;
        m.edges = cls;
        fam.matchings.push_back(m);
    }
    auto out = spread_out(g, fam, 0.05);
    REQUIRE(out.matchings.size() == fam.matchings.size());
    for (std::size_t i = 0; i < out.matchings.size(); ++i)
        REQUIRE(out.matchings[i].size() == 6);
}

TEST_CASE("spread_out fixes a single deficient vertex") {
    // Hand-built 6+6 host: two matchings, one of which misses x0 while x0
    // has spare host edges. One swap should lift x0's union degree.
    int n = 6;
    auto host = rainbow_knn(n);
    MatchingFamily fam;
    RainbowMatching full, withhole;
    for (int i = 0; i < n; ++i) full.edges.emplace_back(i, n + i, host.colour_of(i, n + i));
    for (int i = 1; i < n; ++i)
        withhole.edges.emplace_back(i, n + ((i + 1) % n == 0 ? 1 : (i + 1) % n),
                                    host.colour_of(i, n + ((i + 1) % n == 0 ? 1 : (i + 1) % n)));
    fam.matchings = {full, withhole};
    auto out = spread_out(host, fam, 0.004);
    int deg0 = 0;
    for (const auto& m : out.matchings)
        for (const Edge& e : m.edges)
            if (e.touches(0)) ++deg0;
    REQUIRE(deg0 == 2);
}

TEST_CASE("spread_out on the empty family") {
    auto g = one_factorized_knn(4);
    MatchingFamily fam;
    auto out = spread_out(g, fam, 0.1);
    REQUIRE(out.matchings.empty());
}

// The local search may only increase the potential e(H) - 4 f(H).
TEST_CASE("spread_out never decreases the potential") {
    Rng rng(515);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 12 + rng.index(8);
        auto square = random_generalized_square(n, n * n / 3, rng);
        auto host = square_to_bipartite(square);
        MatchingPipelineConfig cfg;
        auto fam = near_matching_decomposition(host, cfg, rng);
        if (fam.matchings.empty()) continue;
        double p = 0.05;
        int t = static_cast<int>(fam.matchings.size());
        auto potential = [&](const MatchingFamily& f) {
            std::unordered_map<int, int> deg;
            long long edges = 0;
            for (const auto& m : f.matchings)
                for (const Edge& e : m.edges) {
                    ++deg[e.u];
                    ++deg[e.v];
                    ++edges;
                }
            double fh = 0;
            for (int v : host.vertices()) {
                auto it = deg.find(v);
                double d = it == deg.end() ? 0.0 : it->second;
                fh += std::max((1.0 - 100.0 * p) * t - d, 0.0);
            }
            return static_cast<double>(edges) - 4.0 * (fh / 2.0);
        };
        double before = potential(fam);
        auto out = spread_out(host, fam, p);
        if (out.matchings.size() != fam.matchings.size()) continue;  // discards muddy the metric
        double after = potential(out);
        REQUIRE(after >= before - 1e-9);
        for (const auto& m : out.matchings) REQUIRE(verify(m, host).ok());
    }
}

TEST_CASE("perfect_matching_decomposition on a small split host") {
    Rng rng(606);
    int n = 24;
    auto host = rainbow_knn(n);
    auto [companion, base] = sample_colour_subgraph(host, 0.3, rng);
    MatchingPipelineConfig cfg;
    cfg.alpha = 0.2;
    auto res = perfect_matching_decomposition(base, companion, cfg, rng);
    REQUIRE(res.family.matchings.size() >= 3);
    for (const auto& m : res.family.matchings) REQUIRE(verify_perfect_matching(m, host).ok());
    REQUIRE(verify_pairwise_disjoint(edge_lists(res.family.matchings)).ok());
}

TEST_CASE("many_colours_gate") {
    REQUIRE(many_colours_gate(rainbow_knn(6), 0.4));          // n^2 colours
    REQUIRE_FALSE(many_colours_gate(one_factorized_knn(6), 0.1));  // n colours

    Rng rng(9);
    int n = 40;
    int target = static_cast<int>(2 * 0.2 * n * n);
    auto square = random_generalized_square(n, target, rng);
    auto g = square_to_bipartite(square);
    REQUIRE(many_colours_gate(g, 0.2));
}

TEST_CASE("transversal pipeline gates out 1-factorizations") {
    Rng rng(10);
    auto host = square_to_bipartite(GeneralizedLatinSquare::cyclic(3));
    auto res = knn_transversal_pipeline(host, 0.04, rng);
    REQUIRE_FALSE(res.hypothesis_ok);
}

TEST_CASE("transversal pipeline on a many-coloured square") {
    Rng rng(11);
    int n = 30;
    auto square = random_generalized_square(n, n * n / 2, rng);
    auto host = square_to_bipartite(square);
    auto res = knn_transversal_pipeline(host, 0.0125, rng);
    REQUIRE(res.hypothesis_ok);
    REQUIRE(static_cast<int>(res.family.matchings.size()) >= n / 4);
    for (const auto& m : res.family.matchings) REQUIRE(verify_perfect_matching(m, host).ok());
    REQUIRE(verify_pairwise_disjoint(edge_lists(res.family.matchings)).ok());
}

TEST_CASE("small-square pipeline outputs live in the oracle's witness set") {
    Rng rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 3 + rng.index(3);
        auto square = random_generalized_square(n, std::max(n + 1, n * n / 2), rng);
        auto host = square_to_bipartite(square);
        auto res = knn_transversal_pipeline(host, 0.01, rng);
        if (!res.hypothesis_ok) continue;
        auto all = enumerate_transversals(square);
        auto best = max_disjoint_transversals(square);
        REQUIRE(static_cast<long long>(res.family.matchings.size()) <= best.optimum);
        for (const auto& m : res.family.matchings) {
            auto sorted = m.edges;
            std::sort(sorted.begin(), sorted.end());
            bool found = false;
            for (auto w : all.witnesses) {
                std::sort(w.begin(), w.end());
                if (w == sorted) found = true;
            }
            REQUIRE(found);
        }
    }
}
