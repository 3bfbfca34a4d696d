#pragma once

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/hamilton.hpp"
#include "rainbow/pseudorandom.hpp"
#include "rainbow/rng.hpp"
#include "rainbow/structures.hpp"

namespace rainbow {

namespace detail {

// Unique path between two vertices of a tree (edge list), empty if none.
inline std::vector<Edge> tree_path(const std::vector<Edge>& tree, int from, int to) {
    std::unordered_map<int, std::vector<Edge>> adj;
    for (const Edge& e : tree) {
        adj[e.u].push_back(e);
        adj[e.v].push_back(e);
    }
    std::unordered_map<int, Edge> via;
    std::deque<int> queue{from};
    std::unordered_set<int> seen{from};
    while (!queue.empty()) {
        int at = queue.front();
        queue.pop_front();
        if (at == to) break;
        for (const Edge& e : adj[at]) {
            int next = e.other(at);
            if (seen.insert(next).second) {
                via[next] = e;
                queue.push_back(next);
            }
        }
    }
    std::vector<Edge> path;
    if (!seen.count(to)) return path;
    int at = to;
    while (at != from) {
        Edge e = via[at];
        path.push_back(e);
        at = e.other(at);
    }
    return path;
}

}  // namespace detail

// For v with an edge in the attachment graph, returns (xv in T, yv in attach)
// with T - xv + yv again a tree.
inline std::pair<Edge, Edge> tree_edge_swap(const std::vector<Edge>& tree,
                                            const EdgeColouredGraph& attach, int v) {
    const auto& nb = attach.neighbours(v);
    if (nb.empty()) throw std::invalid_argument("vertex isolated in the attachment graph");
    auto [y, c] = nb.front();
    Edge in(v, y, c);
    auto path = detail::tree_path(tree, v, y);
    if (path.empty()) throw std::invalid_argument("attachment endpoints not in the tree");
    // If the attachment edge already lies on T the swap is the identity.
    for (const Edge& e : path)
        if (e.touches(v) && e.touches(y)) return {e, in};
    // The path edge at v closes the unique cycle of T + yv through v.
    for (const Edge& e : path)
        if (e.touches(v)) return {e, in};
    throw std::logic_error("tree path misses its endpoint");
}

// All tree edges removable against some attachment edge (>= |V(attach)|/2 of
// them when the attachment graph has no isolated vertices).
inline std::vector<std::pair<Edge, Edge>> removable_tree_edges(const std::vector<Edge>& tree,
                                                               const EdgeColouredGraph& attach) {
    std::vector<std::pair<Edge, Edge>> out;
    std::unordered_set<std::uint64_t> seen;
    for (const Edge& f : attach.edges()) {
        for (const Edge& e : detail::tree_path(tree, f.u, f.v)) {
            if (seen.insert(pair_key(e.u, e.v)).second) out.push_back({e, f});
        }
    }
    return out;
}

struct TreeExtension {
    bool ok = false;
    std::vector<Edge> tree;   // the extended tree
    int new_edges = 0;        // e(T' \ T) <= 3
    std::string failure;
};

// Extends a rainbow tree by the vertex v using the free colour c: attach a
// colour-c edge at v directly, or free a colour on T by switching in a
// colour-c edge (and possibly one more reserve edge) first.
inline TreeExtension extend_tree_by_vertex(const EdgeColouredGraph& work,
                                           const std::vector<Edge>& tree, int v, int c,
                                           const EdgeColouredGraph& reserve_h) {
    TreeExtension res;
    std::unordered_set<int> tree_vertices;
    std::unordered_set<int> tree_colours;
    std::unordered_set<std::uint64_t> tree_edges;
    for (const Edge& e : tree) {
        tree_vertices.insert(e.u);
        tree_vertices.insert(e.v);
        tree_colours.insert(e.colour);
        tree_edges.insert(pair_key(e.u, e.v));
    }
    if (tree_colours.count(c)) {
        res.failure = "chosen colour already on the tree";
        return res;
    }

    auto attach_with = [&](const std::vector<Edge>& base, int colour_wanted,
                           int extra) -> bool {
        for (auto [w, ec] : work.neighbours(v)) {
            if (ec != colour_wanted || !tree_vertices.count(w)) continue;
            res.tree = base;
            res.tree.emplace_back(v, w, ec);
            res.new_edges = extra + 1;
            res.ok = true;
            return true;
        }
        return false;
    };

    // Direct attach: a colour-c edge at v.
    if (attach_with(tree, c, 0)) return res;

    // J: tree edges freeable by a colour-c edge.
    const auto* c_class = work.colour_class(c);
    if (c_class == nullptr) {
        res.failure = "no usable edge of the chosen colour";
        return res;
    }
    struct Swap {
        Edge out;
        Edge in;
    };
    std::vector<Swap> single;
    std::unordered_set<std::uint64_t> single_seen;
    for (const Edge& e : *c_class) {
        if (!tree_vertices.count(e.u) || !tree_vertices.count(e.v)) continue;
        if (tree_edges.count(pair_key(e.u, e.v))) continue;
        for (const Edge& j : detail::tree_path(tree, e.u, e.v))
            if (single_seen.insert(pair_key(j.u, j.v)).second) single.push_back({j, e});
    }
    if (single.empty()) {
        res.failure = "no tree edge freeable by the chosen colour";
        return res;
    }

    // One switch: T_j = T - j + e_j frees colour c(j).
    for (const Swap& s : single) {
        std::vector<Edge> t1;
        for (const Edge& e : tree)
            if (!(e.u == s.out.u && e.v == s.out.v)) t1.push_back(e);
        t1.push_back(s.in);
        if (attach_with(t1, s.out.colour, 1)) return res;
    }

    // Two switches through the reserve: for j in J, colour-c(j) reserve edges
    // free further tree edges.
    for (const Swap& s : single) {
        const auto* h_class = reserve_h.colour_class(s.out.colour);
        if (h_class == nullptr) continue;
        std::vector<Edge> t1;
        for (const Edge& e : tree)
            if (!(e.u == s.out.u && e.v == s.out.v)) t1.push_back(e);
        t1.push_back(s.in);
        for (const Edge& h : *h_class) {
            if (!tree_vertices.count(h.u) || !tree_vertices.count(h.v)) continue;
            if (tree_edges.count(pair_key(h.u, h.v))) continue;
            for (const Edge& f : detail::tree_path(t1, h.u, h.v)) {
                if (f.colour == c || f.colour == s.out.colour) continue;
                std::vector<Edge> t2;
                for (const Edge& e : t1)
                    if (!(e.u == f.u && e.v == f.v)) t2.push_back(e);
                t2.push_back(h);
                if (attach_with(t2, f.colour, 2)) return res;
            }
        }
    }
    res.failure = "no freed colour matches an edge at the vertex";
    return res;
}

// Minimal connected subgraph of T union F containing F: union-find insertion
// of F first, then T edges that do not close cycles.
inline std::vector<Edge> merge_forest_into_tree(const std::vector<Edge>& tree,
                                                const std::vector<Edge>& forest) {
    std::unordered_set<int> tv;
    for (const Edge& e : tree) {
        tv.insert(e.u);
        tv.insert(e.v);
    }
    for (const Edge& e : forest)
        if (!tv.count(e.u) && !tv.count(e.v))
            throw std::invalid_argument("forest edge disjoint from the tree");
    int ids = 0;
    for (const Edge& e : tree) ids = std::max({ids, e.u + 1, e.v + 1});
    for (const Edge& e : forest) ids = std::max({ids, e.u + 1, e.v + 1});
    detail::Dsu dsu(ids);
    std::vector<Edge> out;
    for (const Edge& e : forest) {
        if (!dsu.unite(e.u, e.v)) throw std::invalid_argument("forest contains a cycle");
        out.push_back(e);
    }
    for (const Edge& e : tree)
        if (dsu.unite(e.u, e.v)) out.push_back(e);
    return out;
}

// ---- Small rainbow forests ----

struct SmallForestResult {
    bool ok = false;
    std::vector<RainbowForest> forests;
    // Vertices outside S present in every forest (the heavy ones).
    std::vector<int> heavy_vertices;
    int blocking_forest = -1;
    std::string note;
};

// m edge-disjoint k-edge rainbow forests in a globally m-bounded graph whose
// edges all touch the vertex cover S; vertices outside S end up either in
// every forest or with degree <= 1 in each. Greedy-maximal with budget
// passes; stalls report the blocking forest.
inline SmallForestResult small_forest_decomposition(const EdgeColouredGraph& g, int m, int k,
                                                    const std::vector<int>& s, Rng& rng) {
    SmallForestResult res;
    std::vector<char> in_s(g.id_space(), 0);
    for (int v : s) in_s[v] = 1;
    for (const Edge& e : g.edges())
        if (!in_s[e.u] && !in_s[e.v])
            throw std::invalid_argument("S is not a vertex cover of the host");
    if (k == 0) {
        res.ok = true;
        res.forests.assign(m, {});
        return res;
    }

    // Heavy vertices outside S join every forest; light ones get degree <= 1.
    std::vector<int> d_v(g.id_space(), 0);
    long long heavy_budget_total = 0;
    for (int v : g.vertices()) {
        if (in_s[v]) continue;
        d_v[v] = std::max(0, (g.degree(v) - 2 * k) / std::max(1, m));
        heavy_budget_total += d_v[v];
    }
    int k_heavy = static_cast<int>(std::min<long long>(heavy_budget_total, k));
    std::vector<std::pair<int, int>> heavy;  // (vertex, edges per forest)
    {
        int left = k_heavy;
        for (int v : g.vertices()) {
            if (in_s[v] || d_v[v] == 0 || left == 0) continue;
            int take = std::min(d_v[v], left);
            heavy.push_back({v, take});
            res.heavy_vertices.push_back(v);
            left -= take;
        }
    }

    struct Forest {
        std::vector<Edge> edges;
        std::unordered_set<int> colours;
        detail::Dsu dsu;
        std::unordered_set<int> light_touched;
        explicit Forest(int ids) : dsu(ids) {}
    };
    std::vector<Forest> forests(m, Forest(g.id_space()));
    std::unordered_set<std::uint64_t> used;

    auto admissible = [&](Forest& f, const Edge& e) {
        if (used.count(pair_key(e.u, e.v))) return false;
        if (f.colours.count(e.colour)) return false;
        if (f.dsu.find(e.u) == f.dsu.find(e.v)) return false;
        for (int w : {e.u, e.v})
            if (!in_s[w] && d_v[w] == 0 && f.light_touched.count(w)) return false;
        return true;
    };
    auto take = [&](Forest& f, const Edge& e) {
        used.insert(pair_key(e.u, e.v));
        f.colours.insert(e.colour);
        f.dsu.unite(e.u, e.v);
        f.edges.push_back(e);
        for (int w : {e.u, e.v})
            if (!in_s[w] && d_v[w] == 0) f.light_touched.insert(w);
    };

    // Phase 1: heavy vertices get their per-forest edges.
    for (auto [v, quota] : heavy) {
        std::vector<Edge> at_v;
        for (auto [w, c] : g.neighbours(v)) at_v.emplace_back(v, w, c);
        rng.shuffle(at_v);
        for (auto& f : forests) {
            int got = 0;
            for (const Edge& e : at_v) {
                if (got == quota) break;
                if (admissible(f, e)) {
                    take(f, e);
                    ++got;
                }
            }
            if (got < quota) {
                res.blocking_forest = static_cast<int>(&f - forests.data());
                res.note = "heavy vertex quota unreachable";
            }
        }
    }

    // Phase 2: round-robin fill to k edges per forest.
    std::vector<Edge> order = g.edges();
    rng.shuffle(order);
    bool progress = true;
    while (progress) {
        progress = false;
        for (auto& f : forests) {
            if (static_cast<int>(f.edges.size()) >= k) continue;
            for (const Edge& e : order) {
                if (!admissible(f, e)) continue;
                take(f, e);
                progress = true;
                break;
            }
        }
    }
    res.ok = true;
    for (auto& f : forests) {
        if (static_cast<int>(f.edges.size()) < k) {
            res.ok = false;
            if (res.blocking_forest < 0) {
                res.blocking_forest = static_cast<int>(&f - forests.data());
                res.note = "forest stalled below k edges";
            }
        }
        RainbowForest rf;
        rf.edges = f.edges;
        res.forests.push_back(std::move(rf));
    }
    return res;
}

// ---- Completion of nearly-spanning trees ----

struct TreeExtensionState {
    EdgeColouredGraph host;                      // the full coloured K_n
    std::vector<std::vector<Edge>> trees;        // rainbow trees, S subseteq V(T_i)
    std::vector<int> s_vertices;                 // the core set S
    std::vector<std::unordered_set<int>> large_budget;  // C_L^i per tree
    EdgeColouredGraph reserve_h;                 // colour-cover reserve on S
};

struct TreeCompletionResult {
    std::vector<std::vector<Edge>> trees;   // spanning on success
    std::vector<int> incomplete;            // indices of quarantined trees
    int extensions = 0;
    int invariant_violations = 0;
    std::string note;
};

namespace detail {

inline bool check_state_invariants(const TreeExtensionState& state,
                                   const std::vector<std::vector<Edge>>& trees,
                                   const std::vector<std::unordered_set<int>>& budgets,
                                   const std::vector<int>& base_vertices,
                                   const std::vector<std::unordered_set<std::uint64_t>>& base_edges,
                                   int host_n, std::string* why) {
    std::vector<char> in_s(state.host.id_space(), 0);
    for (int v : state.s_vertices) in_s[v] = 1;
    for (std::size_t i = 0; i < trees.size(); ++i) {
        std::unordered_set<int> verts;
        std::unordered_map<int, int> deg;
        std::unordered_set<int> colours;
        for (const Edge& e : trees[i]) {
            verts.insert(e.u);
            verts.insert(e.v);
            ++deg[e.u];
            ++deg[e.v];
            if (!colours.insert(e.colour).second) {
                if (why) *why = "tree not rainbow";
                return false;
            }
        }
        for (int v : state.s_vertices)
            if (!verts.count(v)) {
                if (why) *why = "tree lost a core vertex";  // (ii)
                return false;
            }
        // (iii): the budget holds n - |T_i| colours outside C(T_i).
        int missing = host_n - static_cast<int>(verts.size());
        if (static_cast<int>(budgets[i].size()) < missing) {
            if (why) *why = "large-colour budget exhausted";
            return false;
        }
        for (int c : budgets[i])
            if (colours.count(c)) {
                if (why) *why = "budget colour already on the tree";
                return false;
            }
        // (iv): vertices outside S have degree <= 1.
        for (auto [v, d] : deg)
            if (!in_s[v] && d > 1) {
                if (why) *why = "high degree outside the core";
                return false;
            }
        // (vi): e(T' \ T) <= 3 (|T'| - |T|).
        int grown_vertices = static_cast<int>(verts.size()) - base_vertices[i];
        int new_edges = 0;
        for (const Edge& e : trees[i])
            if (!base_edges[i].count(pair_key(e.u, e.v))) ++new_edges;
        if (new_edges > 3 * grown_vertices) {
            if (why) *why = "extension used too many edges";
            return false;
        }
    }
    return true;
}

}  // namespace detail

// Work-queue completion: repeatedly pick a (tree, uncovered vertex) pair,
// assemble the working graph (strip other trees' edges, non-core edges and
// reserved large colours except the chosen one), and extend by one vertex.
// The bookkeeping invariants are re-checked after every extension.
inline TreeCompletionResult complete_trees(const TreeExtensionState& state, Rng& rng) {
    TreeCompletionResult res;
    res.trees = state.trees;
    auto budgets = state.large_budget;
    int n = state.host.n_vertices();
    std::vector<char> in_s(state.host.id_space(), 0);
    for (int v : state.s_vertices) in_s[v] = 1;

    std::vector<int> base_vertices;
    std::vector<std::unordered_set<std::uint64_t>> base_edges;
    for (const auto& t : res.trees) {
        std::unordered_set<int> verts;
        std::unordered_set<std::uint64_t> keys;
        for (const Edge& e : t) {
            verts.insert(e.u);
            verts.insert(e.v);
            keys.insert(pair_key(e.u, e.v));
        }
        base_vertices.push_back(static_cast<int>(verts.size()));
        base_edges.push_back(std::move(keys));
    }
    {
        std::string why;
        if (!detail::check_state_invariants(state, res.trees, budgets, base_vertices, base_edges,
                                            n, &why))
            throw std::invalid_argument("state invariants violated on entry: " + why);
    }

    std::unordered_set<std::uint64_t> tree_edges;
    for (const auto& t : res.trees)
        for (const Edge& e : t) tree_edges.insert(pair_key(e.u, e.v));

    std::deque<std::pair<int, int>> queue;  // (tree, vertex)
    std::vector<std::unordered_set<int>> covered(res.trees.size());
    for (std::size_t i = 0; i < res.trees.size(); ++i) {
        for (const Edge& e : res.trees[i]) {
            covered[i].insert(e.u);
            covered[i].insert(e.v);
        }
        std::vector<int> missing;
        for (int v : state.host.vertices())
            if (!covered[i].count(v)) missing.push_back(v);
        rng.shuffle(missing);
        for (int v : missing) queue.push_back({static_cast<int>(i), v});
    }

    std::vector<char> quarantined(res.trees.size(), 0);
    while (!queue.empty()) {
        auto [i, v] = queue.front();
        queue.pop_front();
        if (quarantined[i] || covered[i].count(v)) continue;
        // Choose the working colour: any budget colour not on the tree.
        if (budgets[i].empty()) {
            quarantined[i] = 1;
            continue;
        }
        int c = *budgets[i].begin();
        for (int cand : budgets[i])
            if (state.host.colour_class_size(cand) > state.host.colour_class_size(c)) c = cand;
        // Working graph: host edges on V(T_i) + v, minus other trees' edges,
        // minus edges missing S entirely, minus reserved colours (except c).
        std::vector<Edge> work_edges;
        std::unordered_set<int> allowed(covered[i].begin(), covered[i].end());
        allowed.insert(v);
        for (const Edge& e : state.host.edges()) {
            if (!allowed.count(e.u) || !allowed.count(e.v)) continue;
            bool is_own = false;
            if (tree_edges.count(pair_key(e.u, e.v))) {
                is_own = std::find_if(res.trees[i].begin(), res.trees[i].end(),
                                      [&](const Edge& t) {
                                          return t.u == e.u && t.v == e.v;
                                      }) != res.trees[i].end();
                if (!is_own) continue;  // another tree owns it
            }
            if (!is_own) {
                if (e.touches(v)) {
                    if (!in_s[e.other(v)]) continue;  // attach must land in S
                } else if (!(in_s[e.u] && in_s[e.v])) {
                    continue;  // swaps stay inside the core
                }
            }
            if (budgets[i].count(e.colour) && e.colour != c && !is_own) continue;
            work_edges.push_back(e);
        }
        EdgeColouredGraph work(state.host.id_space(), work_edges, std::nullopt,
                               state.host.vertices());
        // Reserve restricted to the working graph.
        std::vector<Edge> h_edges;
        for (const Edge& e : state.reserve_h.edges())
            if (work.has_edge(e.u, e.v) && !tree_edges.count(pair_key(e.u, e.v)))
                h_edges.push_back(e);
        EdgeColouredGraph h_work(state.host.id_space(), h_edges, std::nullopt,
                                 state.host.vertices());

        auto ext = extend_tree_by_vertex(work, res.trees[i], v, c, h_work);
        if (!ext.ok) {
            quarantined[i] = 1;
            res.note = ext.failure;
            continue;
        }
        // Commit: update edge ownership and budgets.
        for (const Edge& e : res.trees[i]) tree_edges.erase(pair_key(e.u, e.v));
        res.trees[i] = ext.tree;
        for (const Edge& e : res.trees[i]) tree_edges.insert(pair_key(e.u, e.v));
        covered[i].insert(v);
        budgets[i].erase(c);
        ++res.extensions;
        std::string why;
        if (!detail::check_state_invariants(state, res.trees, budgets, base_vertices, base_edges,
                                            n, &why)) {
            ++res.invariant_violations;
            res.note = "invariant violated after extension: " + why;
        }
        (void)0;
    }
    for (std::size_t i = 0; i < res.trees.size(); ++i)
        if (quarantined[i] || covered[i].size() < static_cast<std::size_t>(n))
            res.incomplete.push_back(static_cast<int>(i));
    return res;
}

// ---- Top-level pipeline ----

struct TreePipelineConfig {
    double gate_gamma = 0.05;       // many-large census threshold
    double eps = 0.1;               // size threshold for the large colours
    double nu = 0.26;               // vertex-sampling fraction for S
    double eta = 0.15;              // reserve edge-sampling rate
    double core_eps = 0.12;         // high-min-degree core parameter
    HamiltonianPipelineConfig hamilton;
    int forest_beta_percent = 10;   // slack for the small-forest stage
};

struct TreePipelineResult {
    bool many_large_branch = false;
    std::vector<RainbowForest> trees;  // spanning rainbow trees
    std::vector<std::vector<Edge>> tree_edges;
    int attempted = 0;
    int invariant_violations = 0;
    int greedy_topup = 0;  // trees harvested from leftover edges afterwards
    std::string note;
};

// Randomized greedy spanning rainbow tree from an edge pool; grows from a
// random root, always taking a pool edge with a fresh colour.
inline std::optional<std::vector<Edge>> greedy_rainbow_spanning_tree(
    const EdgeColouredGraph& pool, const std::vector<int>& vertices, Rng& rng,
    int restarts = 8) {
    int n = static_cast<int>(vertices.size());
    for (int attempt = 0; attempt < restarts; ++attempt) {
        std::unordered_set<int> in_tree{vertices[rng.index(n)]};
        std::unordered_set<int> used_colours;
        std::vector<Edge> tree;
        bool progress = true;
        while (static_cast<int>(in_tree.size()) < n && progress) {
            progress = false;
            std::vector<Edge> frontier;
            for (int v : in_tree)
                for (auto [w, c] : pool.neighbours(v))
                    if (!in_tree.count(w) && !used_colours.count(c))
                        frontier.emplace_back(v, w, c);
            if (frontier.empty()) break;
            const Edge& pick = frontier[rng.index(static_cast<int>(frontier.size()))];
            in_tree.insert(pick.u);
            in_tree.insert(pick.v);
            used_colours.insert(pick.colour);
            tree.push_back(pick);
            progress = true;
        }
        if (static_cast<int>(in_tree.size()) == n) return tree;
    }
    return std::nullopt;
}

// Near-decomposition of a properly coloured K_n into spanning rainbow trees.
// Few large colours: Hamiltonian cycles, one edge dropped each. Many large
// colours: Hamiltonian paths on a random core, small-colour forests merged
// in, then vertex-by-vertex completion.
inline TreePipelineResult spanning_tree_decomposition(const EdgeColouredGraph& host, double eps,
                                                      Rng& rng, TreePipelineConfig cfg = {}) {
    TreePipelineResult res;
    int n = host.n_vertices();
    int large_count = 0;
    for (const auto& [c, cls] : host.colour_classes())
        if (static_cast<double>(cls.size()) >= (1.0 - cfg.gate_gamma) * n / 2) ++large_count;
    res.many_large_branch =
        static_cast<double>(large_count) >= (1.0 - cfg.gate_gamma) * n;

    auto commit = [&](std::vector<Edge> edges) {
        RainbowForest t;
        t.edges = std::move(edges);
        t.spanning_tree = true;
        auto rep = verify_forest(t, host);
        if (!rep.ok()) return false;
        res.trees.push_back(t);
        res.tree_edges.push_back(res.trees.back().edges);
        return true;
    };
    // Harvest stage: extra verified trees straight from the unused edges.
    auto top_up = [&]() {
        std::unordered_set<std::uint64_t> used;
        for (const auto& t : res.tree_edges)
            for (const Edge& e : t) used.insert(pair_key(e.u, e.v));
        for (;;) {
            std::vector<Edge> free_edges;
            for (const Edge& e : host.edges())
                if (!used.count(pair_key(e.u, e.v))) free_edges.push_back(e);
            EdgeColouredGraph pool(host.id_space(), free_edges, std::nullopt, host.vertices());
            auto tree = greedy_rainbow_spanning_tree(pool, host.vertices(), rng);
            if (!tree || !commit(*tree)) break;
            for (const Edge& e : res.tree_edges.back()) used.insert(pair_key(e.u, e.v));
            ++res.greedy_topup;
        }
    };

    if (!res.many_large_branch) {
        auto ham = hamiltonian_decomposition(host, eps, rng, cfg.hamilton);
        if (!ham.hypothesis_ok) {
            res.note = "both branch gates rejected the colouring";
            top_up();
            return res;
        }
        res.attempted = static_cast<int>(ham.cycles.size());
        for (auto& edges : ham.cycle_edges) {
            std::vector<Edge> path = edges;
            path.erase(path.begin() + rng.index(static_cast<int>(path.size())));
            commit(std::move(path));
        }
        top_up();
        return res;
    }

    // Many-large branch.
    std::unordered_set<int> big;
    for (const auto& [c, cls] : host.colour_classes())
        if (static_cast<double>(cls.size()) >= (1.0 - cfg.gate_gamma) * n / 2) big.insert(c);
    auto big_graph = host.restricted_to_colours(big, true);
    auto core = high_min_degree_core(big_graph, cfg.core_eps).core;

    int n2 = static_cast<int>((1.0 - cfg.nu) * core.n_vertices());
    // The Hamiltonian stage partitions into k parts; keep n2 divisible.
    int k = cfg.hamilton.two_factor.k;
    n2 -= n2 % k;
    if (n2 < 3 * k) {
        res.note = "core too small for the path stage";
        top_up();
        return res;
    }
    auto g_s = sample_vertex_subset(core, n2, rng);
    auto [h_reserve, g1] = sample_edge_subgraph(g_s, cfg.eta, rng);

    HamiltonianPipelineConfig hcfg = cfg.hamilton;
    hcfg.assume_bounded = true;  // vertex sampling created the boundedness gap
    auto ham = hamiltonian_decomposition(g1, cfg.eps, rng, hcfg);
    res.attempted = static_cast<int>(ham.cycles.size());
    if (ham.cycles.empty()) {
        res.note = "no Hamiltonian paths on the core";
        top_up();
        return res;
    }
    std::vector<std::vector<Edge>> paths;
    for (auto& edges : ham.cycle_edges) {
        std::vector<Edge> path = edges;
        path.erase(path.begin() + rng.index(static_cast<int>(path.size())));
        paths.push_back(std::move(path));
    }

    // Small colours: C_L are the eps-large classes of the host.
    std::unordered_set<int> c_large;
    for (const auto& [c, cls] : host.colour_classes())
        if (static_cast<double>(cls.size()) >= (1.0 - cfg.eps) * n / 2) c_large.insert(c);
    int k_small = std::max(0, n - 1 - static_cast<int>(c_large.size()));
    std::vector<int> s_vertices = g_s.vertices();

    std::vector<std::vector<Edge>> trees;
    if (k_small > 0) {
        std::vector<Edge> g2_edges;
        std::vector<char> in_s(host.id_space(), 0);
        for (int v : s_vertices) in_s[v] = 1;
        for (const Edge& e : host.edges())
            if (!c_large.count(e.colour) && (in_s[e.u] || in_s[e.v])) g2_edges.push_back(e);
        EdgeColouredGraph g2(host.id_space(), g2_edges, std::nullopt, host.vertices());
        auto forests =
            small_forest_decomposition(g2, static_cast<int>(paths.size()), k_small, s_vertices,
                                       rng);
        for (std::size_t i = 0; i < paths.size(); ++i) {
            if (i < forests.forests.size() && !forests.forests[i].edges.empty())
                trees.push_back(merge_forest_into_tree(paths[i], forests.forests[i].edges));
            else
                trees.push_back(paths[i]);
        }
    } else {
        trees = paths;
    }

    // Budgets: unused large colours per tree.
    TreeExtensionState state;
    state.host = host;
    state.trees = trees;
    state.s_vertices = s_vertices;
    state.reserve_h = h_reserve;
    for (auto& t : state.trees) {
        std::unordered_set<int> used;
        std::unordered_set<int> verts;
        for (const Edge& e : t) {
            used.insert(e.colour);
            verts.insert(e.u);
            verts.insert(e.v);
        }
        int need = n - static_cast<int>(verts.size());
        std::unordered_set<int> budget;
        for (int c : c_large) {
            if (static_cast<int>(budget.size()) >= need) break;
            if (!used.count(c)) budget.insert(c);
        }
        state.large_budget.push_back(std::move(budget));
    }
    // Trees whose budget cannot reach their deficit are dropped up front.
    {
        std::vector<std::vector<Edge>> kept_trees;
        std::vector<std::unordered_set<int>> kept_budgets;
        for (std::size_t i = 0; i < state.trees.size(); ++i) {
            std::unordered_set<int> verts;
            for (const Edge& e : state.trees[i]) {
                verts.insert(e.u);
                verts.insert(e.v);
            }
            if (static_cast<int>(state.large_budget[i].size()) >=
                n - static_cast<int>(verts.size())) {
                kept_trees.push_back(state.trees[i]);
                kept_budgets.push_back(state.large_budget[i]);
            }
        }
        state.trees = std::move(kept_trees);
        state.large_budget = std::move(kept_budgets);
    }
    if (state.trees.empty()) {
        res.note = "no tree had a workable large-colour budget";
        top_up();
        return res;
    }
    auto completed = complete_trees(state, rng);
    res.invariant_violations = completed.invariant_violations;
    std::unordered_set<int> bad(completed.incomplete.begin(), completed.incomplete.end());
    for (std::size_t i = 0; i < completed.trees.size(); ++i) {
        if (bad.count(static_cast<int>(i))) continue;
        commit(completed.trees[i]);
    }
    top_up();
    return res;
}

}  // namespace rainbow
