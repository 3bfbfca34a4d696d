#include <catch2/catch_amalgamated.hpp>

#include "rainbow/generate.hpp"
#include "rainbow/rng.hpp"
#include "rainbow/trees.hpp"

using namespace rainbow;

namespace {

EdgeColouredGraph rainbow_complete_graph(int n, int base = 0) {
    int next = base;
    std::vector<Edge> es;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) es.emplace_back(i, j, next++);
    return EdgeColouredGraph(n, es);
}

bool is_tree_on(const std::vector<Edge>& edges, int n_vertices) {
    if (static_cast<int>(edges.size()) != n_vertices - 1) return false;
    int ids = 0;
    for (const Edge& e : edges) ids = std::max({ids, e.u + 1, e.v + 1});
    detail::Dsu dsu(ids);
    for (const Edge& e : edges)
        if (!dsu.unite(e.u, e.v)) return false;
    return true;
}

}  // namespace

TEST_CASE("tree_edge_swap on a path with a chord") {
    // T = a-b-c (a=0,b=1,c=2); attachment edge ac. Removing the path edge at
    // a and adding ac keeps a tree.
    std::vector<Edge> tree{{0, 1, 0}, {1, 2, 1}};
    std::vector<Edge> chord{{0, 2, 5}};
    EdgeColouredGraph attach(3, chord);
    auto [out, in] = tree_edge_swap(tree, attach, 0);
    REQUIRE(in.u == 0);
    REQUIRE(in.v == 2);
    REQUIRE(out.touches(0));
    std::vector<Edge> swapped;
    for (const Edge& e : tree)
        if (!(e.u == out.u && e.v == out.v)) swapped.push_back(e);
    swapped.push_back(in);
    REQUIRE(is_tree_on(swapped, 3));
}

TEST_CASE("tree_edge_swap with the attachment edge already on the tree") {
    std::vector<Edge> tree{{0, 1, 0}, {1, 2, 1}};
    std::vector<Edge> same{{0, 1, 0}};
    EdgeColouredGraph attach(3, same);
    auto [out, in] = tree_edge_swap(tree, attach, 0);
    REQUIRE(out.u == in.u);
    REQUIRE(out.v == in.v);  // identity-like swap
}

TEST_CASE("tree_edge_swap rejects isolated vertices") {
    std::vector<Edge> tree{{0, 1, 0}, {1, 2, 1}};
    EdgeColouredGraph attach(3, {});
    REQUIRE_THROWS_AS(tree_edge_swap(tree, attach, 0), std::invalid_argument);
}

TEST_CASE("removable_tree_edges finds at least half the attachment span") {
    // Exhaustive over all labelled trees on 5 vertices via random hosts.
    Rng rng(3);
    auto host = rainbow_complete_graph(5, 500);
    std::vector<Edge> tree{{0, 1, 900}, {1, 2, 901}, {2, 3, 902}, {3, 4, 903}};
    std::vector<Edge> attach_edges{{0, 2, 950}, {1, 4, 951}};
    EdgeColouredGraph attach(5, attach_edges);
    auto removables = removable_tree_edges(tree, attach);
    std::unordered_set<int> attach_vertices{0, 2, 1, 4};
    REQUIRE(removables.size() * 2 >= attach_vertices.size());
    for (auto& [e, f] : removables) {
        std::vector<Edge> swapped;
        for (const Edge& t : tree)
            if (!(t.u == e.u && t.v == e.v)) swapped.push_back(t);
        swapped.push_back(f);
        REQUIRE(is_tree_on(swapped, 5));
    }
}

TEST_CASE("extend_tree_by_vertex attaches directly when possible") {
    // Work graph: K_4 rainbow; T spans {0,1,2}; v = 3.
    auto work = rainbow_complete_graph(4);
    std::vector<Edge> tree{{0, 1, work.colour_of(0, 1)}, {1, 2, work.colour_of(1, 2)}};
    int c = work.colour_of(2, 3);
    EdgeColouredGraph empty(4, {});
    auto ext = extend_tree_by_vertex(work, tree, 3, c, empty);
    REQUIRE(ext.ok);
    REQUIRE(ext.new_edges == 1);
    REQUIRE(is_tree_on(ext.tree, 4));
}

TEST_CASE("extend_tree_by_vertex uses a single switch when needed") {
    // v's only edges carry colours already on T; colour c frees one of them.
    // T: 0-1 (colour 10), 1-2 (colour 11). v=3 sees colours 10 and 11 only.
    // A colour-12 edge (c) inside T can replace the tree edge 0-1, freeing
    // colour 10 for the attachment.
    std::vector<Edge> work_edges{{0, 1, 10}, {1, 2, 11}, {3, 0, 10}, {3, 2, 11},
                                 {0, 2, 12}};
    EdgeColouredGraph work(4, work_edges);
    std::vector<Edge> tree{{0, 1, 10}, {1, 2, 11}};
    EdgeColouredGraph empty(4, {});
    auto ext = extend_tree_by_vertex(work, tree, 3, 12, empty);
    REQUIRE(ext.ok);
    REQUIRE(ext.new_edges == 2);
    REQUIRE(is_tree_on(ext.tree, 4));
    // d_{T'}(v) = 1.
    int dv = 0;
    for (const Edge& e : ext.tree)
        if (e.touches(3)) ++dv;
    REQUIRE(dv == 1);
}

TEST_CASE("extend_tree_by_vertex runs the two-switch chain") {
    // Engineered so the direct and single-switch routes fail:
    //   T: 0-1 (10), 1-2 (11), 2-4 (13). v = 3 sees only colour 13.
    //   c = 12 edge 0-2: frees colours 10 or 11 only (path 0-1-2).
    //   Reserve H edge of colour 10 (0-4... wait path in T_j) frees 13.
    // Chain: swap in 0-2 (12) removing 1-2 (11); H edge colour 11 on (1,4)
    // whose T_j-path frees 2-4 (13); attach 3-? with colour 13.
    std::vector<Edge> work_edges{{0, 1, 10}, {1, 2, 11}, {2, 4, 13}, {0, 2, 12},
                                 {3, 4, 13}, {1, 4, 11}};
    EdgeColouredGraph work(5, work_edges);
    std::vector<Edge> tree{{0, 1, 10}, {1, 2, 11}, {2, 4, 13}};
    std::vector<Edge> h_edges{{1, 4, 11}};
    EdgeColouredGraph reserve(5, h_edges);
    auto ext = extend_tree_by_vertex(work, tree, 3, 12, reserve);
    REQUIRE(ext.ok);
    REQUIRE(ext.new_edges <= 3);
    REQUIRE(is_tree_on(ext.tree, 5));
}

TEST_CASE("extend_tree_by_vertex fails without budget") {
    std::vector<Edge> work_edges{{0, 1, 10}, {1, 2, 11}, {3, 0, 10}};
    EdgeColouredGraph work(4, work_edges);
    std::vector<Edge> tree{{0, 1, 10}, {1, 2, 11}};
    EdgeColouredGraph empty(4, {});
    auto ext = extend_tree_by_vertex(work, tree, 3, 99, empty);  // colour 99 absent
    REQUIRE_FALSE(ext.ok);
}

TEST_CASE("merge_forest_into_tree") {
    std::vector<Edge> tree{{0, 1, 0}, {1, 2, 1}, {2, 3, 2}};
    REQUIRE(merge_forest_into_tree(tree, {}) == tree);

    std::vector<Edge> pendant{{3, 4, 9}};
    auto merged = merge_forest_into_tree(tree, pendant);
    REQUIRE(merged.size() == 4);
    REQUIRE(is_tree_on(merged, 5));

    // F creating one cycle with T: exactly one T-edge removed.
    std::vector<Edge> chord{{0, 2, 9}};
    auto cyc = merge_forest_into_tree(tree, chord);
    REQUIRE(cyc.size() == 3);
    REQUIRE(is_tree_on(cyc, 4));
    bool has_chord = false;
    for (const Edge& e : cyc)
        if (e.u == 0 && e.v == 2) has_chord = true;
    REQUIRE(has_chord);

    std::vector<Edge> detached{{5, 6, 9}};
    REQUIRE_THROWS_AS(merge_forest_into_tree(tree, detached), std::invalid_argument);
}

TEST_CASE("small_forest_decomposition trivial cases") {
    Rng rng(5);
    auto g = rainbow_complete_graph(8);
    std::vector<int> s = g.vertices();
    auto res = small_forest_decomposition(g, 4, 0, s, rng);
    REQUIRE(res.ok);
    REQUIRE(res.forests.size() == 4);
    for (const auto& f : res.forests) REQUIRE(f.edges.empty());

    // m = 1: a k-edge rainbow star from a star host.
    std::vector<Edge> star;
    for (int v = 1; v <= 5; ++v) star.emplace_back(0, v, v);
    EdgeColouredGraph sh(6, star);
    auto r2 = small_forest_decomposition(sh, 1, 3, {0}, rng);
    REQUIRE(r2.ok);
    REQUIRE(r2.forests[0].size() == 3);
}

TEST_CASE("small_forest_decomposition on a random bounded host") {
    Rng rng(6);
    // Host: K_{60} colouring with classes <= 10, S = first 54 vertices.
    int n = 60, m = 10, k = 3;
    std::vector<Edge> es;
    int colour = 0, in_class = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            if (rng.bernoulli(0.25)) continue;
            es.emplace_back(i, j, colour);
            if (++in_class == 4) {  // proper-ish small classes
                in_class = 0;
                ++colour;
            }
        }
    EdgeColouredGraph g0(n, es);
    // Keep it properly coloured: rebuild greedily if needed.
    std::vector<Edge> proper;
    std::vector<std::unordered_set<int>> at(n);
    colour = 0;
    for (Edge e : g0.edges()) {
        int c = 0;
        while (at[e.u].count(c) || at[e.v].count(c)) ++c;
        proper.emplace_back(e.u, e.v, c);
        at[e.u].insert(c);
        at[e.v].insert(c);
    }
    EdgeColouredGraph g(n, proper);
    std::vector<int> s;
    for (int v = 0; v < 54; ++v) s.push_back(v);
    // Strip edges entirely outside S so S is a vertex cover.
    std::vector<Edge> covered;
    for (const Edge& e : g.edges())
        if (e.u < 54 || e.v < 54) covered.push_back(e);
    EdgeColouredGraph host(n, covered);
    if (host.global_bound() > m) {
        // Trim oversized classes down to the bound.
        std::unordered_map<int, int> count;
        std::vector<Edge> trimmed;
        for (const Edge& e : host.edges())
            if (++count[e.colour] <= m) trimmed.push_back(e);
        host = EdgeColouredGraph(n, trimmed);
    }
    auto res = small_forest_decomposition(host, m, k, s, rng);
    REQUIRE(res.ok);
    REQUIRE(res.forests.size() == static_cast<std::size_t>(m));
    std::vector<std::vector<Edge>> fams;
    for (const auto& f : res.forests) {
        REQUIRE(f.size() == k);
        REQUIRE(verify_forest(f, host).ok());
        fams.push_back(f.edges);
    }
    REQUIRE(verify_pairwise_disjoint(fams).ok());
    // The cover condition outside S: heavy vertices in every forest, others
    // with degree <= 1 per forest.
    for (int v = 54; v < 60; ++v) {
        bool in_all = true;
        int max_deg = 0;
        for (const auto& f : res.forests) {
            int d = 0;
            for (const Edge& e : f.edges)
                if (e.touches(v)) ++d;
            if (d == 0) in_all = false;
            max_deg = std::max(max_deg, d);
        }
        REQUIRE((in_all || max_deg <= 1));
    }
}

TEST_CASE("complete_trees finishes a single missing vertex") {
    Rng rng(7);
    // Host: rainbow K_6; tree spans S = {0..4}; vertex 5 uncovered.
    auto host = rainbow_complete_graph(6);
    TreeExtensionState state;
    state.host = host;
    std::vector<Edge> path;
    for (int i = 0; i < 4; ++i) path.emplace_back(i, i + 1, host.colour_of(i, i + 1));
    state.trees = {path};
    state.s_vertices = {0, 1, 2, 3, 4};
    state.large_budget = {{host.colour_of(0, 5)}};
    state.reserve_h = EdgeColouredGraph(6, {});
    auto res = complete_trees(state, rng);
    REQUIRE(res.incomplete.empty());
    REQUIRE(res.invariant_violations == 0);
    REQUIRE(is_tree_on(res.trees[0], 6));
}

TEST_CASE("complete_trees is the identity on spanning trees") {
    Rng rng(8);
    auto host = rainbow_complete_graph(5);
    TreeExtensionState state;
    state.host = host;
    std::vector<Edge> star;
    for (int v = 1; v < 5; ++v) star.emplace_back(0, v, host.colour_of(0, v));
    state.trees = {star};
    state.s_vertices = host.vertices();
    state.large_budget = {{}};
    state.reserve_h = EdgeColouredGraph(5, {});
    auto res = complete_trees(state, rng);
    REQUIRE(res.extensions == 0);
    REQUIRE(res.incomplete.empty());
}

TEST_CASE("complete_trees rejects invalid input invariants") {
    Rng rng(9);
    auto host = rainbow_complete_graph(5);
    TreeExtensionState state;
    state.host = host;
    // Tree with a vertex of degree 2 outside S: violates (iv).
    std::vector<Edge> path{{0, 1, host.colour_of(0, 1)},
                           {1, 2, host.colour_of(1, 2)},
                           {2, 3, host.colour_of(2, 3)}};
    state.trees = {path};
    state.s_vertices = {0, 2, 3};  // vertex 1 outside S has degree 2
    state.large_budget = {{host.colour_of(0, 4), host.colour_of(1, 4)}};
    state.reserve_h = EdgeColouredGraph(5, {});
    REQUIRE_THROWS_AS(complete_trees(state, rng), std::invalid_argument);
}

TEST_CASE("spanning tree decomposition routes many-coloured hosts to the Hamiltonian branch") {
    Rng rng(10);
    auto host = rainbow_complete_graph(21);
    TreePipelineConfig cfg;
    cfg.hamilton.two_factor.k = 3;
    cfg.hamilton.companion_fraction = 0.28;
    cfg.hamilton.completion_retries = 6;
    auto res = spanning_tree_decomposition(host, 0.3, rng, cfg);
    REQUIRE_FALSE(res.many_large_branch);
    REQUIRE(res.trees.size() >= 2);
    for (const auto& t : res.trees) REQUIRE(verify_forest(t, host).ok());
    REQUIRE(verify_pairwise_disjoint(res.tree_edges).ok());
}

TEST_CASE("K_3 decomposes into one spanning tree") {
    Rng rng(11);
    auto host = rainbow_complete_graph(3);
    TreePipelineConfig cfg;
    cfg.hamilton.two_factor.k = 3;
    auto res = spanning_tree_decomposition(host, 0.3, rng, cfg);
    REQUIRE(res.trees.size() >= 1);
}

TEST_CASE("spanning tree decomposition on a round-robin K_30") {
    Rng rng(12);
    auto host = one_factorized_kn(30);
    TreePipelineConfig cfg;
    cfg.hamilton.two_factor.k = 3;
    cfg.hamilton.companion_fraction = 0.05;
    cfg.hamilton.completion_retries = 8;
    cfg.nu = 0.12;
    auto res = spanning_tree_decomposition(host, 0.1, rng, cfg);
    REQUIRE(res.many_large_branch);
    REQUIRE(res.invariant_violations == 0);
    REQUIRE(res.trees.size() >= 2);
    for (const auto& t : res.trees) REQUIRE(verify_forest(t, host).ok());
    REQUIRE(verify_pairwise_disjoint(res.tree_edges).ok());
}
