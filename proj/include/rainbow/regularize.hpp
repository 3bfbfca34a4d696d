#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/flow.hpp"
#include "rainbow/pseudorandom.hpp"
#include "rainbow/rng.hpp"

namespace rainbow {

struct DegreeSequencePair {
    std::vector<int> x_degrees;
    std::vector<int> y_degrees;
};

struct GaleRyserResult {
    bool feasible = false;
    // Realized edges as (x index, y index) pairs when feasible.
    std::vector<std::pair<int, int>> edges;
    // 1-based index of the first violated Gale-Ryser inequality; 0 when the
    // degree sums differ.
    int violated_t = -1;
};

// Exact realization of a bipartite degree sequence, or the certificate index.
// Greedy: serve y-vertices largest-first, each consuming the currently
// largest remaining x-capacities.
inline GaleRyserResult gale_ryser_realize(const DegreeSequencePair& degrees) {
    GaleRyserResult res;
    for (int d : degrees.x_degrees)
        if (d < 0) throw std::invalid_argument("negative degree");
    for (int d : degrees.y_degrees)
        if (d < 0) throw std::invalid_argument("negative degree");
    long long sx = std::accumulate(degrees.x_degrees.begin(), degrees.x_degrees.end(), 0LL);
    long long sy = std::accumulate(degrees.y_degrees.begin(), degrees.y_degrees.end(), 0LL);
    if (sx != sy) {
        res.violated_t = 0;
        return res;
    }
    int m = static_cast<int>(degrees.x_degrees.size());
    int n = static_cast<int>(degrees.y_degrees.size());
    std::vector<int> y_order(n);
    std::iota(y_order.begin(), y_order.end(), 0);
    std::sort(y_order.begin(), y_order.end(),
              [&](int a, int b) { return degrees.y_degrees[a] > degrees.y_degrees[b]; });
    // Gale-Ryser: sum_{i<=t} y_(i) <= sum_j min(t, x_j) for every prefix t.
    long long prefix = 0;
    for (int t = 1; t <= n; ++t) {
        prefix += degrees.y_degrees[y_order[t - 1]];
        long long rhs = 0;
        for (int d : degrees.x_degrees) rhs += std::min<long long>(t, d);
        if (prefix > rhs) {
            res.violated_t = t;
            return res;
        }
    }
    std::vector<int> remaining = degrees.x_degrees;
    std::vector<int> x_order(m);
    for (int yi : y_order) {
        int need = degrees.y_degrees[yi];
        std::iota(x_order.begin(), x_order.end(), 0);
        std::stable_sort(x_order.begin(), x_order.end(),
                         [&](int a, int b) { return remaining[a] > remaining[b]; });
        if (need > m || (need > 0 && remaining[x_order[need - 1]] <= 0)) {
            res.violated_t = 1;  // unreachable when the inequalities hold
            return res;
        }
        for (int i = 0; i < need; ++i) {
            --remaining[x_order[i]];
            res.edges.push_back({x_order[i], yi});
        }
    }
    res.feasible = true;
    return res;
}

struct RegularSubgraphResult {
    bool feasible = false;
    EdgeColouredGraph subgraph;
    // Ore-Ryser witness on infeasibility: T subseteq Y with
    // d |T| > sum_x min(|N(x) cap T|, d).
    std::vector<int> witness_t;
};

// Spanning d-regular subgraph of a balanced bipartite graph via one max-flow
// (source -> X at capacity d, unit edge capacities, Y -> sink at d). The
// Ore-Ryser witness is read off the minimum cut.
inline RegularSubgraphResult regular_bipartite_subgraph(const EdgeColouredGraph& g, int d) {
    if (!g.is_bipartite()) throw std::invalid_argument("bipartite graph required");
    const auto& bip = g.bipartition();
    int nx = static_cast<int>(bip.x.size());
    if (nx != static_cast<int>(bip.y.size()))
        throw std::invalid_argument("balanced bipartition required");
    RegularSubgraphResult res;
    if (d == 0) {
        res.feasible = true;
        res.subgraph = g.with_edges({});
        return res;
    }
    std::unordered_map<int, int> xi, yi;
    for (int i = 0; i < nx; ++i) xi[bip.x[i]] = i;
    for (int i = 0; i < nx; ++i) yi[bip.y[i]] = i;
    int source = 2 * nx, sink = 2 * nx + 1;
    MaxFlow flow(2 * nx + 2);
    for (int i = 0; i < nx; ++i) {
        flow.add_edge(source, i, d);
        flow.add_edge(nx + i, sink, d);
    }
    std::vector<int> edge_ids;
    edge_ids.reserve(g.n_edges());
    for (const Edge& e : g.edges()) {
        int a = xi.count(e.u) ? xi[e.u] : xi[e.v];
        int b = yi.count(e.u) ? yi[e.u] : yi[e.v];
        edge_ids.push_back(flow.add_edge(a, nx + b, 1));
    }
    long long pushed = flow.max_flow(source, sink);
    if (pushed == static_cast<long long>(d) * nx) {
        std::vector<Edge> kept;
        const auto& edges = g.edges();
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (flow.flow_on(edge_ids[i]) > 0) kept.push_back(edges[i]);
        res.feasible = true;
        res.subgraph = g.with_edges(std::move(kept));
        return res;
    }
    // Min cut (A = residual source side): T = Y vertices outside A.
    auto side = flow.min_cut_source_side();
    for (int i = 0; i < nx; ++i)
        if (!side[nx + i]) res.witness_t.push_back(bip.y[i]);
    return res;
}

namespace detail {

// Orientation with out-degree in {floor(d/2), ceil(d/2)} for every vertex:
// Euler circuits of the graph with odd-degree vertices joined to a temporary
// dummy vertex, arcs emitted along the traversal.
inline std::vector<Arc> balanced_orientation(const EdgeColouredGraph& g, Rng& rng) {
    int dummy = g.id_space();
    struct Half {
        int to;
        int id;
    };
    std::vector<std::vector<Half>> adj(dummy + 1);
    std::vector<std::pair<int, int>> endpoints;
    std::vector<int> colour_of;
    auto add = [&](int u, int v, int colour) {
        int id = static_cast<int>(endpoints.size());
        endpoints.push_back({u, v});
        colour_of.push_back(colour);
        adj[u].push_back({v, id});
        adj[v].push_back({u, id});
    };
    std::vector<Edge> shuffled = g.edges();
    rng.shuffle(shuffled);
    for (const Edge& e : shuffled) add(e.u, e.v, e.colour);
    for (int v : g.vertices())
        if (g.degree(v) % 2 == 1) add(dummy, v, -1);
    std::vector<char> used(endpoints.size(), 0);
    std::vector<int> cursor(dummy + 1, 0);
    std::vector<Arc> arcs;
    arcs.reserve(g.n_edges());
    std::vector<int> starts{dummy};
    for (int v : g.vertices()) starts.push_back(v);
    std::vector<std::pair<int, int>> stack;  // (vertex, edge arrived by)
    std::vector<std::pair<int, int>> circuit;
    for (int s : starts) {
        stack.clear();
        circuit.clear();
        stack.push_back({s, -1});
        while (!stack.empty()) {
            auto [v, via] = stack.back();
            while (cursor[v] < static_cast<int>(adj[v].size()) && used[adj[v][cursor[v]].id])
                ++cursor[v];
            if (cursor[v] == static_cast<int>(adj[v].size())) {
                circuit.push_back({v, via});
                stack.pop_back();
            } else {
                Half h = adj[v][cursor[v]];
                used[h.id] = 1;
                stack.push_back({h.to, h.id});
            }
        }
        // circuit is the closed trail in reverse: consecutive entries
        // (head, edge) with the next entry's vertex as the tail.
        for (std::size_t i = 0; i + 1 < circuit.size(); ++i) {
            int head = circuit[i].first;
            int id = circuit[i].second;
            int tail = circuit[i + 1].first;
            if (tail == dummy || head == dummy) continue;
            arcs.push_back({tail, head, colour_of[id]});
        }
    }
    return arcs;
}

}  // namespace detail

// Spanning r-regular subgraph of a general graph, r even. A balanced Euler
// orientation reduces the problem to an (r/2)-regular spanning subgraph of
// the out/in bipartite split, solved exactly by flow; fresh orientations are
// tried on infeasibility.
inline RegularSubgraphResult regular_general_subgraph(const EdgeColouredGraph& g, int r,
                                                      Rng& rng, int retry_cap = 10) {
    if (r % 2 != 0) throw std::invalid_argument("r must be even");
    int n = g.n_vertices();
    int delta = g.min_degree();
    if (2 * delta < n) throw std::invalid_argument("minimum degree below n/2");
    double bound = 0.5 * (delta + std::sqrt(static_cast<double>(n) * (2.0 * delta - n)));
    if (r > bound + 1e-9)
        throw std::invalid_argument("r exceeds the guaranteed regular-subgraph bound");
    RegularSubgraphResult res;
    if (r == 0) {
        res.feasible = true;
        res.subgraph = g.with_edges({});
        return res;
    }
    int ids = g.id_space();
    for (int attempt = 0; attempt < retry_cap; ++attempt) {
        auto arcs = detail::balanced_orientation(g, rng);
        // Out-copy of v keeps id v, in-copy gets ids + v.
        std::vector<Edge> split_edges;
        split_edges.reserve(arcs.size());
        for (const Arc& a : arcs) split_edges.emplace_back(a.tail, ids + a.head, a.colour);
        Bipartition bp;
        bp.x = g.vertices();
        bp.y.reserve(n);
        for (int v : g.vertices()) bp.y.push_back(ids + v);
        std::vector<int> verts = bp.x;
        verts.insert(verts.end(), bp.y.begin(), bp.y.end());
        EdgeColouredGraph split(2 * ids, std::move(split_edges), bp, verts);
        auto sub = regular_bipartite_subgraph(split, r / 2);
        if (!sub.feasible) {
            res.witness_t = sub.witness_t;
            continue;
        }
        std::vector<Edge> chosen;
        chosen.reserve(sub.subgraph.n_edges());
        for (const Edge& e : sub.subgraph.edges()) chosen.emplace_back(e.u, e.v - ids, e.colour);
        res.feasible = true;
        res.subgraph = g.with_edges(std::move(chosen));
        res.witness_t.clear();
        return res;
    }
    return res;
}

struct ThinningResult {
    bool ok = false;
    EdgeColouredGraph subgraph;
    int attempts = 0;
    int achieved_bound = 0;
    int achieved_min_degree = 0;
};

// Deletes every large-colour edge with probability eps + eps^2 until the
// result is globally (1 - eps) n / k bounded with minimum degree at least
// (1 - eps + 18 eps^2) n. Large colours are those with >= (1 - 20 eps) n / k
// edges; k = 1 for bipartite hosts, 2 for general ones.
inline ThinningResult thin_large_colours(const EdgeColouredGraph& g, double eps, int k, Rng& rng,
                                         int retry_cap = 20) {
    if (k != 1 && k != 2) throw std::invalid_argument("k must be 1 or 2");
    ThinningResult res;
    double n = g.is_bipartite() ? static_cast<double>(g.bipartition().x.size())
                                : static_cast<double>(g.n_vertices());
    double large_threshold = (1.0 - 20.0 * eps) * n / k;
    double target_bound = (1.0 - eps) * n / k;
    double target_delta = (1.0 - eps + 18.0 * eps * eps) * n;
    std::unordered_set<int> large;
    for (const auto& [c, cls] : g.colour_classes())
        if (static_cast<double>(cls.size()) >= large_threshold) large.insert(c);
    if (large.empty() || static_cast<double>(g.global_bound()) <= target_bound) {
        res.ok = true;
        res.subgraph = g;
        res.achieved_bound = g.global_bound();
        res.achieved_min_degree = g.min_degree();
        return res;
    }
    double p = eps + eps * eps;
    EdgeColouredGraph best = g;
    for (int attempt = 1; attempt <= retry_cap; ++attempt) {
        std::vector<Edge> kept;
        kept.reserve(g.n_edges());
        for (const Edge& e : g.edges())
            if (!large.count(e.colour) || !rng.bernoulli(p)) kept.push_back(e);
        EdgeColouredGraph h = g.with_edges(std::move(kept));
        int gb = h.global_bound();
        int md = h.min_degree();
        res.attempts = attempt;
        if (attempt == 1 || gb < res.achieved_bound) {
            best = h;
            res.achieved_bound = gb;
            res.achieved_min_degree = md;
        }
        if (static_cast<double>(gb) <= target_bound &&
            static_cast<double>(md) >= target_delta) {
            res.ok = true;
            res.subgraph = std::move(h);
            res.achieved_bound = gb;
            res.achieved_min_degree = md;
            return res;
        }
    }
    res.subgraph = std::move(best);
    return res;
}

struct ReserveRegularizationResult {
    bool ok = false;
    EdgeColouredGraph subgraph;        // H, a subgraph of the input
    std::vector<Edge> patch_matching;  // N, edges taken from the reserve
    // Blocking surplus pair on failure.
    int blocked_x = -1, blocked_y = -1;
};

// Inductive switch of the reserve-regularization proof: while some x in X and
// y in Y exceed degree d, find a reserve edge uv with u in N(x), v in N(y),
// both of degree exactly d, delete xu and yv, and add uv to the patch
// matching N. Ends with H (union N) exactly d-regular when it succeeds.
inline ReserveRegularizationResult regularize_with_reserve(const EdgeColouredGraph& g,
                                                           const EdgeColouredGraph& reserve,
                                                           int d) {
    if (!g.is_bipartite()) throw std::invalid_argument("bipartite graph required");
    const auto& bip = g.bipartition();
    ReserveRegularizationResult res;
    if (g.min_degree() < d) throw std::invalid_argument("minimum degree below d");

    std::vector<std::unordered_set<int>> adj(g.id_space());
    for (const Edge& e : g.edges()) {
        adj[e.u].insert(e.v);
        adj[e.v].insert(e.u);
    }
    auto deg = [&](int v) { return static_cast<int>(adj[v].size()); };
    std::vector<char> matched(g.id_space(), 0);

    auto surplus_vertex = [&](const std::vector<int>& side) {
        for (int v : side)
            if (deg(v) > d) return v;
        return -1;
    };

    for (;;) {
        int x = surplus_vertex(bip.x);
        int y = surplus_vertex(bip.y);
        if (x < 0 && y < 0) break;
        if (x < 0 || y < 0) {
            // Degree sums per side are equal, so one-sided surplus means the
            // input violated the balanced-surplus hypothesis.
            res.blocked_x = x;
            res.blocked_y = y;
            return res;
        }
        bool switched = false;
        for (int u : adj[x]) {
            if (deg(u) != d || matched[u]) continue;
            for (auto [v, c] : reserve.neighbours(u)) {
                if (matched[v] || deg(v) != d) continue;
                if (!adj[y].count(v)) continue;
                adj[x].erase(u);
                adj[u].erase(x);
                adj[y].erase(v);
                adj[v].erase(y);
                matched[u] = matched[v] = 1;
                res.patch_matching.emplace_back(u, v, reserve.colour_of(u, v));
                switched = true;
                break;
            }
            if (switched) break;
        }
        if (!switched) {
            res.blocked_x = x;
            res.blocked_y = y;
            return res;
        }
    }
    std::vector<Edge> kept;
    kept.reserve(g.n_edges());
    for (const Edge& e : g.edges())
        if (adj[e.u].count(e.v)) kept.push_back(e);
    res.subgraph = g.with_edges(std::move(kept));
    res.ok = true;
    return res;
}

struct AddVerticesResult {
    bool ok = false;
    EdgeColouredGraph supergraph;
    int first_padding_colour = 0;  // new edges carry fresh one-off colours from here
    int added_per_side = 0;
};

// Embeds a (gamma, delta, n)-regular balanced bipartite graph into a
// d-regular supergraph for d = ceil((1 + 5 gamma) delta n), adding at most
// 9 gamma n vertices per side. All new edges touch new vertices; new edges
// carry fresh unique colours. Degree completion realized by Gale-Ryser.
inline AddVerticesResult regularize_add_vertices(const EdgeColouredGraph& g, double gamma,
                                                 double delta, int pad_retry_cap = 5) {
    if (!g.is_bipartite()) throw std::invalid_argument("bipartite graph required");
    const auto& bip = g.bipartition();
    int n = static_cast<int>(bip.x.size());
    AddVerticesResult res;
    int d = static_cast<int>(std::ceil((1.0 + 5.0 * gamma) * delta * n));
    d = std::max(d, g.max_degree());
    long long m = static_cast<long long>(d) * n - g.n_edges();
    if (m == 0) {
        res.ok = true;
        res.supergraph = g;
        res.first_padding_colour = g.max_colour_id() + 1;
        return res;
    }
    // Every deficit must be coverable by the new part, and the filler graph H
    // between the new parts must fit: d pad - m <= pad^2.
    int max_deficit = 0;
    for (int v : g.vertices()) max_deficit = std::max(max_deficit, d - g.degree(v));
    int pad = std::max(static_cast<int>((m + d - 1) / d), max_deficit);

    for (int attempt = 0; attempt <= pad_retry_cap; ++attempt, ++pad) {
        long long h_edges = static_cast<long long>(d) * pad - m;
        if (h_edges < 0 || h_edges > static_cast<long long>(pad) * pad) continue;
        // New ids: X' = base .. base+pad-1, Y' = base+pad .. base+2pad-1.
        int base = g.id_space();
        std::vector<int> xs(pad), ys(pad);
        for (int i = 0; i < pad; ++i) xs[i] = base + i;
        for (int i = 0; i < pad; ++i) ys[i] = base + pad + i;
        int next_colour = g.max_colour_id() + 1;
        res.first_padding_colour = next_colour;
        std::vector<Edge> edges = g.edges();
        // H between X' and Y' with h_edges edges, degrees as equal as
        // possible: fill along diagonals.
        std::vector<int> hx(pad, 0), hy(pad, 0);
        long long placed = 0;
        for (int diag = 0; diag < pad && placed < h_edges; ++diag)
            for (int i = 0; i < pad && placed < h_edges; ++i) {
                int j = (i + diag) % pad;
                edges.emplace_back(xs[i], ys[j], next_colour++);
                ++hx[i];
                ++hy[j];
                ++placed;
            }
        // Degree deficits.
        std::vector<int> kx(pad), ky(pad);
        for (int i = 0; i < pad; ++i) kx[i] = d - hx[i];
        for (int i = 0; i < pad; ++i) ky[i] = d - hy[i];
        DegreeSequencePair j1;  // X' to Y
        j1.x_degrees = kx;
        for (int y : bip.y) j1.y_degrees.push_back(d - g.degree(y));
        DegreeSequencePair j2;  // Y' to X
        j2.x_degrees = ky;
        for (int x : bip.x) j2.y_degrees.push_back(d - g.degree(x));
        auto r1 = gale_ryser_realize(j1);
        auto r2 = gale_ryser_realize(j2);
        if (!r1.feasible || !r2.feasible) continue;
        for (auto [xi, yi] : r1.edges) edges.emplace_back(xs[xi], bip.y[yi], next_colour++);
        for (auto [yi, xi] : r2.edges) edges.emplace_back(ys[yi], bip.x[xi], next_colour++);
        Bipartition nb;
        nb.x = bip.x;
        nb.x.insert(nb.x.end(), xs.begin(), xs.end());
        nb.y = bip.y;
        nb.y.insert(nb.y.end(), ys.begin(), ys.end());
        std::sort(nb.x.begin(), nb.x.end());
        std::sort(nb.y.begin(), nb.y.end());
        std::vector<int> verts = nb.x;
        verts.insert(verts.end(), nb.y.begin(), nb.y.end());
        res.supergraph = EdgeColouredGraph(base + 2 * pad, std::move(edges), nb, verts);
        res.added_per_side = pad;
        res.ok = true;
        return res;
    }
    return res;
}

// One-factorization of a d-regular balanced bipartite graph: d perfect
// matchings extracted by repeated max flow.
inline std::vector<std::vector<Edge>> one_factorization(const EdgeColouredGraph& g) {
    if (!g.is_bipartite()) throw std::invalid_argument("bipartite graph required");
    int d = g.n_vertices() == 0 ? 0 : g.degree(g.vertices()[0]);
    for (int v : g.vertices())
        if (g.degree(v) != d) throw std::invalid_argument("graph is not regular");
    std::vector<std::vector<Edge>> factors;
    EdgeColouredGraph cur = g;
    for (int round = 0; round < d; ++round) {
        auto sub = regular_bipartite_subgraph(cur, 1);
        if (!sub.feasible)
            throw std::logic_error("regular bipartite graph failed to 1-factorize");
        factors.push_back(sub.subgraph.edges());
        cur = cur.without_edges(sub.subgraph.edges());
    }
    return factors;
}

struct DenseReserveResult {
    bool ok = false;
    EdgeColouredGraph regular_part;        // H, (d - floor(p n))-regular subgraph of g
    std::vector<std::pair<int, int>> reserve;  // dense uncoloured reserve edge set
    int attempts = 0;
};

// Splits a d-regular balanced bipartite graph into a (d - floor(p n))-regular
// part and a dense reserve: 1-factorize the graph and its bipartite
// complement so every class lies wholly inside or outside g, choose each
// class with probability p/2 for the reserve, and keep enough unchosen
// g-classes for the regular part.
inline DenseReserveResult reserve_dense_complement(const EdgeColouredGraph& g, double p,
                                                   Rng& rng, int retry_cap = 10) {
    if (!g.is_bipartite()) throw std::invalid_argument("bipartite graph required");
    const auto& bip = g.bipartition();
    int n = static_cast<int>(bip.x.size());
    int d = g.n_vertices() == 0 ? 0 : g.degree(g.vertices()[0]);
    int target = d - static_cast<int>(p * n);
    DenseReserveResult res;
    if (target < 0) throw std::invalid_argument("p n exceeds the regular degree");
    if (p == 0.0) {
        res.ok = true;
        res.regular_part = g;
        return res;
    }
    auto g_factors = one_factorization(g);
    // Complement classes.
    std::vector<Edge> missing;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int u = bip.x[i], v = bip.y[j];
            if (!g.has_edge(u, v)) missing.emplace_back(u, v, 0);
        }
    EdgeColouredGraph complement(g.id_space(), std::move(missing), g.bipartition(),
                                 g.vertices());
    auto c_factors = one_factorization(complement);

    for (int attempt = 1; attempt <= retry_cap; ++attempt) {
        res.attempts = attempt;
        std::vector<char> g_chosen(g_factors.size(), 0);
        std::vector<std::pair<int, int>> reserve;
        for (std::size_t i = 0; i < g_factors.size(); ++i)
            if (rng.bernoulli(p / 2)) {
                g_chosen[i] = 1;
                for (const Edge& e : g_factors[i]) reserve.push_back({e.u, e.v});
            }
        for (const auto& cls : c_factors)
            if (rng.bernoulli(p / 2))
                for (const Edge& e : cls) reserve.push_back({e.u, e.v});
        int unchosen = 0;
        for (char c : g_chosen) unchosen += (c == 0);
        if (unchosen < target) continue;  // resample
        std::vector<Edge> kept;
        int used = 0;
        for (std::size_t i = 0; i < g_factors.size() && used < target; ++i) {
            if (g_chosen[i]) continue;
            kept.insert(kept.end(), g_factors[i].begin(), g_factors[i].end());
            ++used;
        }
        res.regular_part = g.with_edges(std::move(kept));
        res.reserve = std::move(reserve);
        res.ok = true;
        return res;
    }
    return res;
}

}  // namespace rainbow
