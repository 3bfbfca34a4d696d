#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/rng.hpp"

namespace rainbow {

// Exact witnesses for the (gamma, delta, n)-regular / -typical definitions.
// gamma_achieved is the smallest gamma for which the definition holds, from
// exact degree/codegree extrema.
struct TypicalityReport {
    double gamma_achieved = 0.0;
    double delta_estimate = 0.0;
    int worst_vertex = -1;
    std::pair<int, int> worst_pair{-1, -1};
    bool codegrees_checked = false;
};

struct BoundednessReport {
    int global_bound = 0;
    int local_bound = 0;
    std::vector<int> largest_colours;  // class sizes, descending
};

namespace detail {

inline double rel_dev(double value, double target) {
    if (target <= 0.0) return value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(value - target) / target;
}

inline void fold_degrees(const EdgeColouredGraph& g, double delta, double n,
                         TypicalityReport& rep) {
    double target = delta * n;
    for (int v : g.vertices()) {
        double dev = rel_dev(g.degree(v), target);
        if (dev > rep.gamma_achieved) {
            rep.gamma_achieved = dev;
            rep.worst_vertex = v;
        }
    }
    double total = 0;
    for (int v : g.vertices()) total += g.degree(v);
    rep.delta_estimate = g.n_vertices() == 0 ? 0.0 : total / (g.n_vertices() * n);
}

inline void fold_codegrees_within(const EdgeColouredGraph& g, const std::vector<int>& side,
                                  double delta, double n, TypicalityReport& rep) {
    double target = delta * delta * n;
    for (std::size_t i = 0; i < side.size(); ++i)
        for (std::size_t j = i + 1; j < side.size(); ++j) {
            double dev = rel_dev(g.codegree(side[i], side[j]), target);
            if (dev > rep.gamma_achieved) {
                rep.gamma_achieved = dev;
                rep.worst_pair = {side[i], side[j]};
            }
        }
}

constexpr double kCheckSlack = 1e-9;

}  // namespace detail

// (gamma, delta, n)-regular: every degree in (1 +- gamma) delta n; part sizes
// (bipartite) or vertex count (general) in (1 +- gamma) n.
inline std::pair<bool, TypicalityReport> check_regular(const EdgeColouredGraph& g, double gamma,
                                                       double delta, double n) {
    TypicalityReport rep;
    if (g.is_bipartite()) {
        const auto& b = g.bipartition();
        rep.gamma_achieved = std::max(detail::rel_dev(static_cast<double>(b.x.size()), n),
                                      detail::rel_dev(static_cast<double>(b.y.size()), n));
    } else {
        rep.gamma_achieved = detail::rel_dev(g.n_vertices(), n);
    }
    detail::fold_degrees(g, delta, n, rep);
    return {rep.gamma_achieved <= gamma + detail::kCheckSlack, rep};
}

// Regularity plus codegrees (1 +- gamma) delta^2 n; pairs within one side for
// bipartite graphs, all pairs otherwise.
inline std::pair<bool, TypicalityReport> check_typical(const EdgeColouredGraph& g, double gamma,
                                                       double delta, double n) {
    auto [ok, rep] = check_regular(g, gamma, delta, n);
    rep.codegrees_checked = true;
    if (g.is_bipartite()) {
        detail::fold_codegrees_within(g, g.bipartition().x, delta, n, rep);
        detail::fold_codegrees_within(g, g.bipartition().y, delta, n, rep);
    } else {
        detail::fold_codegrees_within(g, g.vertices(), delta, n, rep);
    }
    return {rep.gamma_achieved <= gamma + detail::kCheckSlack, rep};
}

inline BoundednessReport boundedness(const EdgeColouredGraph& g) {
    BoundednessReport rep;
    for (const auto& [c, cls] : g.colour_classes())
        rep.largest_colours.push_back(static_cast<int>(cls.size()));
    std::sort(rep.largest_colours.rbegin(), rep.largest_colours.rend());
    rep.global_bound = rep.largest_colours.empty() ? 0 : rep.largest_colours.front();
    rep.local_bound = g.local_bound();
    return rep;
}

// Discrepancy |e(A,B) - p|A||B|| against the typical-graph bound
// 2 |A|^(1/2) |B| gamma^(1/2) n^(1/2) p.
struct DiscrepancyResult {
    bool precondition_ok = false;
    double discrepancy = 0.0;
    double bound = 0.0;
    bool within_bound = false;
    std::string note;
};

inline DiscrepancyResult density_discrepancy(const EdgeColouredGraph& g,
                                             const std::vector<int>& a, const std::vector<int>& b,
                                             double p, double gamma) {
    DiscrepancyResult res;
    double n = g.is_bipartite() ? static_cast<double>(g.bipartition().x.size())
                                : static_cast<double>(g.n_vertices());
    std::unordered_set<int> sa(a.begin(), a.end());
    for (int v : b)
        if (sa.count(v)) {
            res.note = "A and B intersect";
            return res;
        }
    if (gamma > 0 && p > 0 && static_cast<double>(b.size()) < 1.0 / (gamma * p * p)) {
        res.note = "|B| below gamma^-1 p^-2";
        return res;
    }
    res.precondition_ok = true;
    long long eab = 0;
    std::vector<char> in_b(g.id_space(), 0);
    for (int v : b) in_b[v] = 1;
    for (int u : a)
        for (auto [w, c] : g.neighbours(u))
            if (in_b[w]) ++eab;
    res.discrepancy = std::abs(static_cast<double>(eab) -
                               p * static_cast<double>(a.size()) * static_cast<double>(b.size()));
    res.bound = 2.0 * std::sqrt(static_cast<double>(a.size())) *
                static_cast<double>(b.size()) * std::sqrt(gamma) * std::sqrt(n) * p;
    res.within_bound = res.discrepancy <= res.bound + detail::kCheckSlack;
    return res;
}

// Each colour class goes wholly to the chosen part with probability prob,
// otherwise wholly to the complement. Outputs partition the edges.
inline std::pair<EdgeColouredGraph, EdgeColouredGraph> sample_colour_subgraph(
    const EdgeColouredGraph& g, double prob, Rng& rng) {
    std::unordered_set<int> chosen_colours;
    for (const auto& [c, cls] : g.colour_classes())
        if (rng.bernoulli(prob)) chosen_colours.insert(c);
    std::vector<Edge> chosen, rest;
    for (const Edge& e : g.edges())
        (chosen_colours.count(e.colour) ? chosen : rest).push_back(e);
    return {g.with_edges(std::move(chosen)), g.with_edges(std::move(rest))};
}

// Per-edge independent choice.
inline std::pair<EdgeColouredGraph, EdgeColouredGraph> sample_edge_subgraph(
    const EdgeColouredGraph& g, double prob, Rng& rng) {
    std::vector<Edge> chosen, rest;
    for (const Edge& e : g.edges()) (rng.bernoulli(prob) ? chosen : rest).push_back(e);
    return {g.with_edges(std::move(chosen)), g.with_edges(std::move(rest))};
}

// Uniform random vertex subset of the requested size; induced subgraph.
inline EdgeColouredGraph sample_vertex_subset(const EdgeColouredGraph& g, int size, Rng& rng) {
    if (size > g.n_vertices()) throw std::invalid_argument("subset size exceeds vertex count");
    auto picks = rng.sample_without_replacement(g.n_vertices(), size);
    std::vector<int> subset;
    subset.reserve(size);
    for (int idx : picks) subset.push_back(g.vertices()[idx]);
    return g.induced(subset);
}

// Two disjoint uniform subsets; bipartite-style induced subgraph G[A, B].
inline EdgeColouredGraph sample_vertex_subset_pair(const EdgeColouredGraph& g, int size_a,
                                                   int size_b, Rng& rng) {
    if (size_a + size_b > g.n_vertices())
        throw std::invalid_argument("subset sizes exceed vertex count");
    auto picks = rng.sample_without_replacement(g.n_vertices(), size_a + size_b);
    rng.shuffle(picks);
    std::vector<int> a, b;
    for (int i = 0; i < size_a; ++i) a.push_back(g.vertices()[picks[i]]);
    for (int i = size_a; i < size_a + size_b; ++i) b.push_back(g.vertices()[picks[i]]);
    return g.between(a, b);
}

struct ColourCoverResult {
    bool holds = false;
    bool exhaustive = false;
    long long subsets_checked = 0;
    double worst_cover_fraction = 1.0;
    std::vector<int> worst_subset;
};

// True iff every k-subset of colours covers >= (1 - eps) n vertices.
// Exhaustive for <= 20 colours, otherwise sampled (noted in the result).
inline ColourCoverResult colour_cover_check(const EdgeColouredGraph& g, int k, double eps,
                                            Rng* rng = nullptr,
                                            int sampled_trials = 10000) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    ColourCoverResult res;
    int n = g.n_vertices();
    int n_colours = g.n_colours();
    if (n_colours < k || n == 0) {
        res.holds = n_colours >= k || n == 0;
        res.exhaustive = true;
        return res;
    }
    int words = (g.id_space() + 63) / 64;
    std::vector<std::vector<std::uint64_t>> masks;
    masks.reserve(n_colours);
    for (const auto& [c, cls] : g.colour_classes()) {
        std::vector<std::uint64_t> m(words, 0);
        for (const Edge& e : cls) {
            m[e.u >> 6] |= 1ULL << (e.u & 63);
            m[e.v >> 6] |= 1ULL << (e.v & 63);
        }
        masks.push_back(std::move(m));
    }
    double threshold = (1.0 - eps) * n;
    res.holds = true;
    auto evaluate = [&](const std::vector<int>& subset) {
        ++res.subsets_checked;
        std::vector<std::uint64_t> acc(words, 0);
        for (int ci : subset)
            for (int w = 0; w < words; ++w) acc[w] |= masks[ci][w];
        int covered = 0;
        for (int w = 0; w < words; ++w) covered += __builtin_popcountll(acc[w]);
        double frac = static_cast<double>(covered) / n;
        if (frac < res.worst_cover_fraction) {
            res.worst_cover_fraction = frac;
            res.worst_subset = subset;
        }
        if (static_cast<double>(covered) + detail::kCheckSlack < threshold) res.holds = false;
    };
    if (n_colours <= 20) {
        res.exhaustive = true;
        std::vector<int> subset(k);
        auto rec = [&](auto&& self, int start, int depth) -> void {
            if (depth == k) {
                evaluate(subset);
                return;
            }
            for (int i = start; i <= n_colours - (k - depth); ++i) {
                subset[depth] = i;
                self(self, i + 1, depth + 1);
            }
        };
        rec(rec, 0, 0);
    } else {
        if (rng == nullptr) throw std::invalid_argument("sampled colour_cover_check needs an rng");
        res.exhaustive = false;
        for (int t = 0; t < sampled_trials && res.holds; ++t)
            evaluate(rng->sample_without_replacement(n_colours, k));
    }
    return res;
}

struct OrientationResult {
    Digraph digraph;
    int min_out_degree = 0;
    int attempts = 0;
    bool target_met = false;
};

// Independent uniform orientation, retried until min out-degree >= delta(G)/3.
inline OrientationResult random_orientation(const EdgeColouredGraph& g, Rng& rng,
                                            int retry_cap = 20) {
    OrientationResult best;
    best.min_out_degree = -1;
    int target = g.n_edges() == 0 ? 0 : g.min_degree() / 3;
    for (int attempt = 1; attempt <= retry_cap; ++attempt) {
        std::vector<Arc> arcs;
        arcs.reserve(g.n_edges());
        for (const Edge& e : g.edges()) {
            if (rng.bernoulli(0.5))
                arcs.push_back({e.u, e.v, e.colour});
            else
                arcs.push_back({e.v, e.u, e.colour});
        }
        Digraph d(g.id_space(), std::move(arcs));
        int mod = d.min_out_degree(g.vertices());
        if (mod > best.min_out_degree) {
            best.min_out_degree = mod;
            best.digraph = std::move(d);
        }
        best.attempts = attempt;
        if (best.min_out_degree >= target) {
            best.target_met = true;
            return best;
        }
    }
    return best;
}

struct CoreResult {
    EdgeColouredGraph core;
    bool precondition_ok = false;
    int deleted = 0;
};

// Iteratively delete vertices of degree <= (1 - eps/2) |current| until none
// remain. Guarantees min degree >= (1 - eps) n when e(G) >= (1-(eps/2)^2) n^2 / 2.
inline CoreResult high_min_degree_core(const EdgeColouredGraph& g, double eps) {
    CoreResult res;
    double n = g.n_vertices();
    res.precondition_ok =
        static_cast<double>(g.n_edges()) >= (1.0 - (eps / 2) * (eps / 2)) * n * n / 2.0;
    EdgeColouredGraph cur = g;
    for (;;) {
        double threshold = (1.0 - eps / 2) * cur.n_vertices();
        std::vector<int> keep;
        for (int v : cur.vertices())
            if (static_cast<double>(cur.degree(v)) >= threshold - detail::kCheckSlack)
                keep.push_back(v);
        if (static_cast<int>(keep.size()) == cur.n_vertices() || keep.empty()) {
            if (keep.empty() && cur.n_vertices() > 0) res.precondition_ok = false;
            break;
        }
        cur = cur.induced(keep);
    }
    res.deleted = g.n_vertices() - cur.n_vertices();
    res.core = std::move(cur);
    return res;
}

}  // namespace rainbow
