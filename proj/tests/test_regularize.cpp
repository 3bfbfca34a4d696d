#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "rainbow/generate.hpp"
#include "rainbow/regularize.hpp"
#include "rainbow/rng.hpp"
#include "rainbow/structures.hpp"

using namespace rainbow;

namespace {

bool is_regular(const EdgeColouredGraph& g, int d) {
    for (int v : g.vertices())
        if (g.degree(v) != d) return false;
    return true;
}

bool is_subgraph(const EdgeColouredGraph& sub, const EdgeColouredGraph& g) {
    for (const Edge& e : sub.edges())
        if (!g.has_edge(e.u, e.v)) return false;
    return true;
}

long long ore_ryser_lhs(const EdgeColouredGraph& g, const std::vector<int>& t, int d) {
    std::vector<char> in_t(g.id_space(), 0);
    for (int v : t) in_t[v] = 1;
    long long total = 0;
    for (int x : g.bipartition().x) {
        int hits = 0;
        for (auto [w, c] : g.neighbours(x)) hits += in_t[w];
        total += std::min(hits, d);
    }
    return total;
}

}  // namespace

TEST_CASE("regular bipartite subgraph of K_{3,3} at d=2") {
    auto g = one_factorized_knn(3);
    auto res = regular_bipartite_subgraph(g, 2);
    REQUIRE(res.feasible);
    REQUIRE(is_regular(res.subgraph, 2));
    REQUIRE(is_subgraph(res.subgraph, g));
}

TEST_CASE("regular bipartite subgraph of a 6-cycle at d=1") {
    std::vector<Edge> c6{{0, 3, 0}, {1, 3, 1}, {1, 4, 2}, {2, 4, 0}, {2, 5, 1}, {0, 5, 2}};
    auto g = EdgeColouredGraph::bipartite(3, c6);
    auto res = regular_bipartite_subgraph(g, 1);
    REQUIRE(res.feasible);
    REQUIRE(is_regular(res.subgraph, 1));
    REQUIRE(res.subgraph.n_edges() == 3);
}

TEST_CASE("infeasible degree yields an Ore-Ryser witness") {
    // A star x0 - {y0, y1, y2} padded with isolated vertices on both sides.
    std::vector<Edge> star{{0, 3, 0}, {0, 4, 1}, {0, 5, 2}};
    auto g = EdgeColouredGraph::bipartite(3, star);
    auto res = regular_bipartite_subgraph(g, 1);
    REQUIRE_FALSE(res.feasible);
    REQUIRE_FALSE(res.witness_t.empty());
    // d |T| > sum_x min(|N(x) cap T|, d) certifies infeasibility.
    REQUIRE(static_cast<long long>(res.witness_t.size()) > ore_ryser_lhs(g, res.witness_t, 1));
}

TEST_CASE("Ore-Ryser witnesses certify every random infeasible case") {
    Rng rng(21);
    int infeasible_seen = 0;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 3 + rng.index(6);
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (rng.bernoulli(0.35)) edges.emplace_back(i, n + j, 0);
        EdgeColouredGraph g;
        try {
            g = EdgeColouredGraph::bipartite(n, edges);
        } catch (const std::invalid_argument&) {
            continue;
        }
        int d = 1 + rng.index(2);
        if (g.min_degree() < d) continue;
        auto res = regular_bipartite_subgraph(g, d);
        if (res.feasible) {
            REQUIRE(is_regular(res.subgraph, d));
            REQUIRE(is_subgraph(res.subgraph, g));
        } else {
            ++infeasible_seen;
            REQUIRE(static_cast<long long>(d) * res.witness_t.size() >
                    ore_ryser_lhs(g, res.witness_t, d));
        }
    }
    REQUIRE(infeasible_seen > 0);
}

TEST_CASE("regular general subgraph of K_5 at r=2") {
    auto g = circulant_colouring(5);
    Rng rng(4);
    auto res = regular_general_subgraph(g, 2, rng);
    REQUIRE(res.feasible);
    REQUIRE(is_regular(res.subgraph, 2));
    REQUIRE(is_subgraph(res.subgraph, g));
}

TEST_CASE("regular general subgraph of K_6 at r=4") {
    auto g = one_factorized_kn(6);
    Rng rng(5);
    auto res = regular_general_subgraph(g, 4, rng);
    REQUIRE(res.feasible);
    REQUIRE(is_regular(res.subgraph, 4));
}

TEST_CASE("regular general subgraph rejects low minimum degree") {
    std::vector<Edge> path{{0, 1, 0}, {1, 2, 1}, {2, 3, 0}};
    EdgeColouredGraph g(4, path);
    Rng rng(6);
    REQUIRE_THROWS_AS(regular_general_subgraph(g, 2, rng), std::invalid_argument);
}

TEST_CASE("gale_ryser realizes small feasible sequences") {
    DegreeSequencePair d;
    d.x_degrees = {2, 1, 1};
    d.y_degrees = {2, 1, 1};
    auto res = gale_ryser_realize(d);
    REQUIRE(res.feasible);
    std::vector<int> dx(3, 0), dy(3, 0);
    for (auto [x, y] : res.edges) {
        ++dx[x];
        ++dy[y];
    }
    REQUIRE(dx == d.x_degrees);
    REQUIRE(dy == d.y_degrees);
}

TEST_CASE("gale_ryser certifies infeasibility") {
    DegreeSequencePair d;
    d.x_degrees = {2, 2};
    d.y_degrees = {3, 1};
    auto res = gale_ryser_realize(d);
    REQUIRE_FALSE(res.feasible);
    REQUIRE(res.violated_t == 1);  // 3 > min(1,2) + min(1,2) = 2

    DegreeSequencePair zero;
    zero.x_degrees = {0, 0, 0};
    zero.y_degrees = {0, 0, 0};
    auto rz = gale_ryser_realize(zero);
    REQUIRE(rz.feasible);
    REQUIRE(rz.edges.empty());
}

// Brute-force cross-check: realizable iff some bitmask bipartite graph on
// small parts hits the degree sequence exactly.
TEST_CASE("gale_ryser agrees with exhaustive search on small parts") {
    Rng rng(31);
    for (int trial = 0; trial < 120; ++trial) {
        int m = 1 + rng.index(4), n = 1 + rng.index(4);
        DegreeSequencePair d;
        for (int i = 0; i < m; ++i) d.x_degrees.push_back(rng.index(n + 1));
        for (int j = 0; j < n; ++j) d.y_degrees.push_back(rng.index(m + 1));
        bool brute = false;
        for (int mask = 0; mask < (1 << (m * n)) && !brute; ++mask) {
            std::vector<int> dx(m, 0), dy(n, 0);
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j)
                    if (mask & (1 << (i * n + j))) {
                        ++dx[i];
                        ++dy[j];
                    }
            brute = dx == d.x_degrees && dy == d.y_degrees;
        }
        auto res = gale_ryser_realize(d);
        REQUIRE(res.feasible == brute);
        if (res.feasible) {
            std::vector<int> dx(m, 0), dy(n, 0);
            for (auto [x, y] : res.edges) {
                ++dx[x];
                ++dy[y];
            }
            REQUIRE(dx == d.x_degrees);
            REQUIRE(dy == d.y_degrees);
        }
    }
}

TEST_CASE("thinning is the identity when no colour is large") {
    Rng rng(41);
    auto g = one_factorized_knn(10);  // classes of size 10
    // eps = 0.01: large means >= 0.8 * 10 = 8 edges -> all classes large.
    // Use a rainbow host instead: every class has one edge, never large.
    std::vector<Edge> es;
    int next = 0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) es.emplace_back(i, 6 + j, next++);
    auto rainbow_host = EdgeColouredGraph::bipartite(6, es);
    auto res = thin_large_colours(rainbow_host, 0.01, 1, rng);
    REQUIRE(res.ok);
    REQUIRE(res.subgraph.n_edges() == rainbow_host.n_edges());

    EdgeColouredGraph empty = EdgeColouredGraph::bipartite(4, {});
    auto re = thin_large_colours(empty, 0.05, 1, rng);
    REQUIRE(re.ok);
    REQUIRE(re.subgraph.n_edges() == 0);
    (void)g;
}

TEST_CASE("thinning reduces the global bound in regime") {
    // K_{200,200} colouring with ten classes of ~100 edges and the rest
    // shattered into singletons: few large colours, full degrees.
    int n = 200;
    std::vector<Edge> es;
    int fresh = n;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            int sym = (r + c) % n;
            bool keep = sym < 10 && r < n / 2;
            es.emplace_back(r, n + c, keep ? sym : fresh++);
        }
    auto g = EdgeColouredGraph::bipartite(n, es);
    Rng rng(43);
    double eps = 0.03;
    auto res = thin_large_colours(g, eps, 1, rng);
    REQUIRE(res.ok);
    REQUIRE(res.achieved_bound <= (1.0 - eps) * n);
    REQUIRE(res.achieved_min_degree >= (1.0 - eps + 18 * eps * eps) * n);
}

TEST_CASE("reserve regularization fixes a single surplus") {
    // X = {0,1}, Y = {2,3}: G has degrees (2,1) / (2,1); target d = 1.
    // A reserve edge between the two degree-1 endpoints closes the gap.
    std::vector<Edge> ge{{0, 2, 0}, {0, 3, 1}, {1, 2, 2}};
    Bipartition bp;
    bp.x = {0, 1};
    bp.y = {2, 3};
    EdgeColouredGraph g(4, ge, bp);
    std::vector<Edge> re{{1, 3, 5}};
    EdgeColouredGraph reserve(4, re, bp);
    auto res = regularize_with_reserve(g, reserve, 1);
    REQUIRE(res.ok);
    REQUIRE(res.patch_matching.size() == 1);
    // H union N is exactly 1-regular.
    std::vector<int> deg(4, 0);
    for (const Edge& e : res.subgraph.edges()) {
        ++deg[e.u];
        ++deg[e.v];
    }
    for (const Edge& e : res.patch_matching) {
        ++deg[e.u];
        ++deg[e.v];
    }
    for (int v = 0; v < 4; ++v) REQUIRE(deg[v] == 1);
}

TEST_CASE("reserve regularization is the identity on regular input") {
    auto g = one_factorized_knn(4);
    EdgeColouredGraph reserve = g.with_edges({});
    auto res = regularize_with_reserve(g, reserve, 4);
    REQUIRE(res.ok);
    REQUIRE(res.patch_matching.empty());
    REQUIRE(res.subgraph.n_edges() == g.n_edges());
}

TEST_CASE("reserve regularization fails gracefully without reserve edges") {
    std::vector<Edge> ge{{0, 2, 0}, {0, 3, 1}, {1, 2, 2}};
    Bipartition bp;
    bp.x = {0, 1};
    bp.y = {2, 3};
    EdgeColouredGraph g(4, ge, bp);
    EdgeColouredGraph reserve(4, {}, bp);
    auto res = regularize_with_reserve(g, reserve, 1);
    REQUIRE_FALSE(res.ok);
    REQUIRE(res.blocked_x >= 0);
}

TEST_CASE("reserve regularization on a larger random instance") {
    Rng rng(47);
    auto g0 = one_factorized_knn(16);
    // Remove two disjoint near-perfect matchings' worth of edges to create
    // surplus relative to d = 14.
    auto res14 = regular_bipartite_subgraph(g0, 14);
    REQUIRE(res14.feasible);
    auto leftovers = g0.without_edges(res14.subgraph.edges());
    // Graph: the 14-regular core plus a few leftover edges (surplus).
    std::vector<Edge> mixed = res14.subgraph.edges();
    int extra = 0;
    for (const Edge& e : leftovers.edges()) {
        if (extra >= 3) break;
        mixed.push_back(e);
        ++extra;
    }
    auto g = g0.with_edges(mixed);
    // Reserve: the remaining unused complement edges.
    auto reserve = leftovers.without_edges(mixed);
    auto res = regularize_with_reserve(g, reserve, 14);
    if (res.ok) {
        std::vector<int> deg(g.id_space(), 0);
        for (const Edge& e : res.subgraph.edges()) {
            ++deg[e.u];
            ++deg[e.v];
        }
        for (const Edge& e : res.patch_matching) {
            ++deg[e.u];
            ++deg[e.v];
        }
        for (int v : g.vertices()) REQUIRE(deg[v] == 14);
        REQUIRE(res.patch_matching.size() <= 3);
    }
}

TEST_CASE("regularize_add_vertices embeds K_{5,5} into itself") {
    auto g = one_factorized_knn(5);
    auto res = regularize_add_vertices(g, 0.0, 1.0);
    REQUIRE(res.ok);
    REQUIRE(res.added_per_side == 0);
    REQUIRE(res.supergraph.n_edges() == 25);
}

TEST_CASE("regularize_add_vertices completes a near-regular bipartite graph") {
    Rng rng(53);
    auto g0 = one_factorized_knn(50);
    // Half-density near-regular bipartite graph: generous gamma regime.
    std::vector<Edge> kept;
    for (const Edge& e : g0.edges())
        if (rng.bernoulli(0.5)) kept.push_back(e);
    auto g = g0.with_edges(kept);
    double delta = 0.5, gamma = 0.25;
    auto res = regularize_add_vertices(g, gamma, delta);
    REQUIRE(res.ok);
    const auto& sup = res.supergraph;
    int d = sup.degree(sup.bipartition().x[0]);
    for (int v : sup.vertices()) REQUIRE(sup.degree(v) == d);
    // Old-vertex restriction equals the input.
    auto restricted = sup.induced(g.vertices());
    REQUIRE(restricted.n_edges() == g.n_edges());
    // New edges touch new vertices only.
    for (const Edge& e : sup.edges())
        if (!g.has_edge(e.u, e.v))
            REQUIRE((e.u >= g.id_space() || e.v >= g.id_space()));
    REQUIRE(res.added_per_side <= static_cast<int>(9 * gamma * 50) + 1);
}

TEST_CASE("regularize_add_vertices on an exactly regular input pads nothing") {
    auto g = regular_bipartite_subgraph(one_factorized_knn(20), 16).subgraph;
    auto res = regularize_add_vertices(g, 0.0, 0.8);
    REQUIRE(res.ok);
    REQUIRE(res.added_per_side == 0);
    REQUIRE(res.supergraph.n_edges() == g.n_edges());
}

TEST_CASE("dense complement reserve splits a regular graph") {
    Rng rng(59);
    auto g = one_factorized_knn(10);
    auto res = reserve_dense_complement(g, 0.2, rng);
    REQUIRE(res.ok);
    for (int v : res.regular_part.vertices()) REQUIRE(res.regular_part.degree(v) == 8);
    // Reserve and regular part are edge-disjoint.
    for (auto [u, v] : res.reserve) REQUIRE_FALSE(res.regular_part.has_edge(u, v));

    auto ident = reserve_dense_complement(g, 0.0, rng);
    REQUIRE(ident.ok);
    REQUIRE(ident.regular_part.n_edges() == g.n_edges());

    REQUIRE_THROWS_AS(reserve_dense_complement(one_factorized_knn(3).with_edges({}), 2.0, rng),
                      std::invalid_argument);
}

TEST_CASE("one_factorization splits regular bipartite graphs into matchings") {
    auto g = one_factorized_knn(6);
    auto factors = one_factorization(g);
    REQUIRE(factors.size() == 6);
    std::vector<std::vector<Edge>> fams(factors.begin(), factors.end());
    REQUIRE(verify_pairwise_disjoint(fams).ok());
    for (const auto& f : factors) REQUIRE(f.size() == 6);
}
