#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/nibble.hpp"
#include "rainbow/pseudorandom.hpp"
#include "rainbow/regularize.hpp"
#include "rainbow/rng.hpp"
#include "rainbow/structures.hpp"

namespace rainbow {

struct MatchingFamily {
    std::vector<RainbowMatching> matchings;
    int dummy_threshold = -1;  // colours >= this were dummies (already stripped)
    std::vector<int> dummy_colours_used;
    int attempted = 0;
    int regularization_fallbacks = 0;
    bool boundedness_violated = false;
    std::string note;
};

struct MatchingPipelineConfig {
    double alpha = 0.05;        // nibble activation
    double nibble_p = 0.1;      // nibble leftover target
    double reserve_fraction = 0.05;  // p for the dense complement reserve
    double stop_fraction = 0.08;     // nu: stop the descending process at nu * D
    int regularize_period = 10;      // k: re-regularize every k-th step
    bool stop_on_bound_violation = false;
    double spread_p = 0.05;          // p for the spread-out local search
    // Colour shares of the typical companion graph when completing.
    double share_e = 0.5, share_dx = 0.25, share_dy = 0.25;
    int augment_depth = 4;           // alternating-path booster depth
    int completion_retries = 3;
};

namespace detail {

inline std::unordered_map<int, int> partner_map(const RainbowMatching& m) {
    std::unordered_map<int, int> sigma;
    for (const Edge& e : m.edges) {
        sigma[e.u] = e.v;
        sigma[e.v] = e.u;
    }
    return sigma;
}

}  // namespace detail

enum class RotationFailure { None, EmptyNeighbourhood, NoLinkingEdge };

// One matching rotation: for uncovered x, y find u, v, m_u, m_v with uv in E,
// x m_u in D_X, y m_v in D_Y, u m_u, v m_v in M, and exchange to a matching
// one edge larger. Deterministic first-admissible search.
inline std::optional<RainbowMatching> extend_matching_once(
    const RainbowMatching& m, const EdgeColouredGraph& reserve_e,
    const EdgeColouredGraph& reserve_dx, const EdgeColouredGraph& reserve_dy, int x, int y,
    RotationFailure* failure = nullptr) {
    auto sigma = detail::partner_map(m);
    if (failure) *failure = RotationFailure::EmptyNeighbourhood;
    std::vector<std::pair<int, int>> left;  // (u, m_u)
    for (auto [mu, c] : reserve_dx.neighbours(x)) {
        auto it = sigma.find(mu);
        if (it != sigma.end()) left.push_back({it->second, mu});
    }
    std::vector<std::pair<int, int>> right;  // (v, m_v)
    for (auto [mv, c] : reserve_dy.neighbours(y)) {
        auto it = sigma.find(mv);
        if (it != sigma.end()) right.push_back({it->second, mv});
    }
    if (left.empty() || right.empty()) return std::nullopt;
    if (failure) *failure = RotationFailure::NoLinkingEdge;
    for (auto [u, mu] : left) {
        for (auto [v, mv] : right) {
            if (u == v || mu == mv || u == mv || v == mu) continue;
            if (!reserve_e.has_edge(u, v)) continue;
            RainbowMatching grown;
            for (const Edge& e : m.edges) {
                bool removed = (e.touches(u) && e.touches(mu)) || (e.touches(v) && e.touches(mv));
                if (!removed) grown.edges.push_back(e);
            }
            grown.edges.emplace_back(x, mu, reserve_dx.colour_of(x, mu));
            grown.edges.emplace_back(u, v, reserve_e.colour_of(u, v));
            grown.edges.emplace_back(y, mv, reserve_dy.colour_of(y, mv));
            if (failure) *failure = RotationFailure::None;
            return grown;
        }
    }
    return std::nullopt;
}

struct CompletionResult {
    bool ok = false;
    RainbowMatching matching;
    int rotations = 0;
    int failed_round = -1;
    RotationFailure failure = RotationFailure::None;
    int edges_from_e = 0, edges_from_dx = 0, edges_from_dy = 0;
};

// Iterates extend_matching_once until the matching is perfect, filtering the
// reserves by already-used colours before each rotation. Reserves must be
// colour-disjoint from the starting matching and from each other.
inline CompletionResult complete_matching(const RainbowMatching& m0,
                                          const EdgeColouredGraph& reserve_e,
                                          const EdgeColouredGraph& reserve_dx,
                                          const EdgeColouredGraph& reserve_dy) {
    if (!reserve_e.is_bipartite()) throw std::invalid_argument("bipartite reserves required");
    const auto& bip = reserve_e.bipartition();
    std::unordered_set<int> m_colours;
    for (const Edge& e : m0.edges) m_colours.insert(e.colour);
    auto colour_clash = [&](const EdgeColouredGraph& r) {
        for (const auto& [c, cls] : r.colour_classes())
            if (m_colours.count(c)) return true;
        return false;
    };
    if (colour_clash(reserve_e) || colour_clash(reserve_dx) || colour_clash(reserve_dy))
        throw std::invalid_argument("reserve shares a colour with the matching");
    for (const auto& [c, cls] : reserve_e.colour_classes())
        if (reserve_dx.colour_class_size(c) > 0 || reserve_dy.colour_class_size(c) > 0)
            throw std::invalid_argument("reserves share colours");
    for (const auto& [c, cls] : reserve_dx.colour_classes())
        if (reserve_dy.colour_class_size(c) > 0)
            throw std::invalid_argument("reserves share colours");

    CompletionResult res;
    res.matching = m0;
    std::vector<char> covered(reserve_e.id_space(), 0);
    for (const Edge& e : m0.edges) covered[e.u] = covered[e.v] = 1;
    std::unordered_set<std::uint64_t> m0_keys;
    for (const Edge& e : m0.edges) m0_keys.insert(pair_key(e.u, e.v));

    int n = static_cast<int>(bip.x.size());
    while (res.matching.size() < n) {
        std::unordered_set<int> used;
        for (const Edge& e : res.matching.edges) used.insert(e.colour);
        auto filt = [&](const EdgeColouredGraph& r) { return r.restricted_to_colours(used, false); };
        EdgeColouredGraph fe = filt(reserve_e);
        EdgeColouredGraph fdx = filt(reserve_dx);
        EdgeColouredGraph fdy = filt(reserve_dy);
        std::vector<int> ux, uy;
        for (int v : bip.x)
            if (!covered[v]) ux.push_back(v);
        for (int v : bip.y)
            if (!covered[v]) uy.push_back(v);
        bool advanced = false;
        for (int x : ux) {
            for (int y : uy) {
                RotationFailure why;
                auto grown = extend_matching_once(res.matching, fe, fdx, fdy, x, y, &why);
                res.failure = why;
                if (grown) {
                    res.matching = std::move(*grown);
                    covered[x] = covered[y] = 1;
                    // Two old matched vertices were re-matched, coverage else
                    // unchanged; recompute cheaply.
                    ++res.rotations;
                    advanced = true;
                    break;
                }
            }
            if (advanced) break;
        }
        if (!advanced) {
            res.failed_round = res.rotations;
            return res;
        }
    }
    for (const Edge& e : res.matching.edges) {
        if (m0_keys.count(pair_key(e.u, e.v))) continue;
        if (reserve_e.has_edge(e.u, e.v) && reserve_e.colour_of(e.u, e.v) == e.colour)
            ++res.edges_from_e;
        else if (reserve_dx.has_edge(e.u, e.v) && reserve_dx.colour_of(e.u, e.v) == e.colour)
            ++res.edges_from_dx;
        else if (reserve_dy.has_edge(e.u, e.v) && reserve_dy.colour_of(e.u, e.v) == e.colour)
            ++res.edges_from_dy;
    }
    res.ok = true;
    return res;
}

// Alternating-path booster: grows a rainbow matching inside an edge pool by
// short augmenting paths that respect colour availability. Desk-scale aid for
// tiny sub-instances where the nibble's asymptotics have no room; results are
// always re-verified by the callers.
inline bool rainbow_augment(RainbowMatching& m, const EdgeColouredGraph& pool,
                            const std::vector<int>& side_x, Rng& rng, int depth_cap = 4,
                            bool prefer_rare_colours = false) {
    std::unordered_map<int, int> sigma = detail::partner_map(m);
    std::unordered_map<int, Edge> edge_at;  // covered vertex -> its matching edge
    for (const Edge& e : m.edges) {
        edge_at[e.u] = e;
        edge_at[e.v] = e;
    }
    std::unordered_set<int> used_colours;
    for (const Edge& e : m.edges) used_colours.insert(e.colour);

    std::vector<int> free_x;
    for (int v : side_x)
        if (!sigma.count(v) && pool.has_vertex(v)) free_x.push_back(v);
    rng.shuffle(free_x);

    std::vector<Edge> add, remove;
    std::unordered_set<int> freed, added_colours;
    std::unordered_set<int> on_path;

    auto admissible = [&](int c) {
        return (!used_colours.count(c) || freed.count(c)) && !added_colours.count(c);
    };

    auto dfs = [&](auto&& self, int x, int depth) -> bool {
        on_path.insert(x);
        auto nbs = pool.neighbours(x);
        std::vector<std::pair<int, int>> order(nbs.begin(), nbs.end());
        rng.shuffle(order);
        // Optionally prefer rare colours: spending a small class costs later
        // matchings the least. The shuffle above keeps ties random.
        if (prefer_rare_colours)
            std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
                return pool.colour_class_size(a.second) < pool.colour_class_size(b.second);
            });
        for (auto [y, c] : order) {
            if (on_path.count(y) || !admissible(c)) continue;
            auto it = sigma.find(y);
            if (it == sigma.end()) {
                add.emplace_back(x, y, c);
                return true;
            }
            if (depth >= depth_cap) continue;
            const Edge& me = edge_at[y];
            add.emplace_back(x, y, c);
            remove.push_back(me);
            added_colours.insert(c);
            freed.insert(me.colour);
            on_path.insert(y);
            if (self(self, it->second, depth + 1)) return true;
            on_path.erase(y);
            add.pop_back();
            remove.pop_back();
            added_colours.erase(c);
            freed.erase(me.colour);
        }
        on_path.erase(x);
        return false;
    };

    for (int x : free_x) {
        add.clear();
        remove.clear();
        freed.clear();
        added_colours.clear();
        on_path.clear();
        if (dfs(dfs, x, 0)) {
            std::unordered_set<std::uint64_t> gone;
            for (const Edge& e : remove) gone.insert(pair_key(e.u, e.v));
            RainbowMatching grown;
            for (const Edge& e : m.edges)
                if (!gone.count(pair_key(e.u, e.v))) grown.edges.push_back(e);
            for (const Edge& e : add) grown.edges.push_back(e);
            m = std::move(grown);
            return true;
        }
    }
    return false;
}

// Descending near-decomposition into nearly-perfect rainbow matchings: set
// aside a dense complement reserve, then repeatedly strip nibble matchings
// from a d-regular graph, re-regularizing with dummy-coloured reserve patches
// every k-th step. Emitted matchings contain no dummy colours.
inline MatchingFamily near_matching_decomposition(const EdgeColouredGraph& g,
                                                  const MatchingPipelineConfig& cfg, Rng& rng) {
    if (!g.is_bipartite()) throw std::invalid_argument("bipartite graph required");
    MatchingFamily family;
    int n = static_cast<int>(g.bipartition().x.size());
    if (n == 0 || g.n_edges() == 0) return family;
    family.dummy_threshold = g.max_colour_id() + 1;

    // Exact-regular base: extract the largest feasible regular subgraph.
    int d0 = g.min_degree();
    EdgeColouredGraph base = g;
    {
        RegularSubgraphResult res;
        while (d0 > 0) {
            res = regular_bipartite_subgraph(g, d0);
            if (res.feasible) break;
            --d0;
        }
        if (d0 == 0) return family;
        base = res.subgraph;
    }

    auto reserve_split = reserve_dense_complement(base, cfg.reserve_fraction, rng);
    if (!reserve_split.ok) {
        family.note = "dense reserve construction failed";
        return family;
    }
    EdgeColouredGraph cur = reserve_split.regular_part;
    int cap_d = d0 - static_cast<int>(cfg.reserve_fraction * n);
    // Reserve kept as an uncoloured adjacency structure.
    std::vector<Edge> reserve_edges;
    for (auto [u, v] : reserve_split.reserve) reserve_edges.emplace_back(u, v, 0);
    EdgeColouredGraph reserve(g.id_space(), reserve_edges, g.bipartition(), g.vertices());

    int next_dummy = family.dummy_threshold;
    int floor_d = std::max(1, static_cast<int>(cfg.stop_fraction * cap_d));
    for (int d = cap_d; d > floor_d; --d) {
        ++family.attempted;
        if (cur.global_bound() > d) {
            family.boundedness_violated = true;
            if (cfg.stop_on_bound_violation) {
                family.note = "stopped: global boundedness violated at d=" + std::to_string(d);
                break;
            }
        }
        NibbleConfig ncfg;
        ncfg.alpha = cfg.alpha;
        ncfg.p = cfg.nibble_p;
        ncfg.delta = static_cast<double>(d) / n;
        ncfg.n = n;
        ncfg.ell = cur.local_bound();
        Rng sub = rng.split(d);
        auto nib = near_perfect_rainbow_matching(cur, ncfg, sub);
        family.matchings.push_back(strip_dummy_edges(nib.matching, family.dummy_threshold));

        EdgeColouredGraph stripped = cur.without_edges(nib.matching.edges);
        if (d % cfg.regularize_period == 0 && d > floor_d + 1) {
            auto reg = regularize_with_reserve(stripped, reserve, d - 1);
            if (reg.ok) {
                std::vector<Edge> next_edges = reg.subgraph.edges();
                if (!reg.patch_matching.empty()) {
                    int c_d = next_dummy++;
                    family.dummy_colours_used.push_back(c_d);
                    for (const Edge& e : reg.patch_matching)
                        next_edges.emplace_back(e.u, e.v, c_d);
                    reserve = reserve.without_edges(reg.patch_matching);
                }
                cur = cur.with_edges(std::move(next_edges));
                continue;
            }
            ++family.regularization_fallbacks;
            auto flow = regular_bipartite_subgraph(stripped, d - 1);
            if (flow.feasible) {
                cur = flow.subgraph;
                continue;
            }
            // Proceed slightly irregular; the nibble tolerates it and the
            // envelope diagnostics record the drift.
            family.note = "regularization skipped at d=" + std::to_string(d);
        }
        cur = std::move(stripped);
    }
    return family;
}

// Local search making a matching family spread out: maximizes
// e(H) - 4 f(H) with f_H(v) = max((1-100p) t - d_H(v), 0), then discards the
// smallest matchings. The move swaps one pool edge into a matching missing
// its deficient endpoint, dropping at most two conflicting edges.
inline MatchingFamily spread_out(const EdgeColouredGraph& g, const MatchingFamily& family,
                                 double p) {
    MatchingFamily out = family;
    auto& ms = out.matchings;
    int t = static_cast<int>(ms.size());
    if (t == 0) return out;
    int n = static_cast<int>(g.bipartition().x.size());

    std::vector<int> deg_h(g.id_space(), 0);
    std::unordered_set<std::uint64_t> in_h;
    for (const auto& m : ms)
        for (const Edge& e : m.edges) {
            ++deg_h[e.u];
            ++deg_h[e.v];
            in_h.insert(pair_key(e.u, e.v));
        }
    double low = (1.0 - 100.0 * p) * t;
    double u_threshold = (1.0 - 10.0 * p) * t;

    long long cap = 10LL * t * n;
    long long iterations = 0;
    bool improved = true;
    while (improved && iterations < cap) {
        improved = false;
        for (int u : g.vertices()) {
            if (deg_h[u] >= low) continue;
            // U: all vertices of low H-degree.
            std::vector<char> in_u(g.id_space(), 0);
            for (int v : g.vertices())
                if (deg_h[v] <= u_threshold) in_u[v] = 1;
            for (int i = 0; i < t && !improved; ++i) {
                bool covers = false;
                for (const Edge& e : ms[i].edges)
                    if (e.touches(u)) covers = true;
                if (covers) continue;
                // Edges of N_i touching U and their colours.
                std::unordered_set<int> blocked_vertices, blocked_colours;
                for (const Edge& e : ms[i].edges)
                    if (in_u[e.u] || in_u[e.v]) {
                        blocked_vertices.insert(e.u);
                        blocked_vertices.insert(e.v);
                        blocked_colours.insert(e.colour);
                    }
                for (auto [y, c] : g.neighbours(u)) {
                    if (in_h.count(pair_key(u, y))) continue;
                    if (blocked_vertices.count(y) || blocked_colours.count(c)) continue;
                    // Swap uy in; drop conflicting edges (<= 2, outside U).
                    std::vector<Edge> dropped;
                    std::vector<Edge> kept;
                    for (const Edge& e : ms[i].edges) {
                        if (e.touches(y) || e.colour == c)
                            dropped.push_back(e);
                        else
                            kept.push_back(e);
                    }
                    kept.emplace_back(u, y, c);
                    for (const Edge& e : dropped) {
                        --deg_h[e.u];
                        --deg_h[e.v];
                        in_h.erase(pair_key(e.u, e.v));
                    }
                    ++deg_h[u];
                    ++deg_h[y];
                    in_h.insert(pair_key(u, y));
                    ms[i].edges = std::move(kept);
                    improved = true;
                    ++iterations;
                    break;
                }
            }
            if (improved) break;
        }
    }
    // Discard undersized matchings (at most p t of them in regime).
    std::stable_sort(ms.begin(), ms.end(),
                     [](const RainbowMatching& a, const RainbowMatching& b) {
                         return a.size() > b.size();
                     });
    double size_floor = (1.0 - 10.0 * p) * n;
    while (!ms.empty() &&
           (static_cast<double>(ms.back().size()) < size_floor &&
            static_cast<double>(ms.size()) > (1.0 - p) * t))
        ms.pop_back();
    return out;
}

struct PerfectFamilyResult {
    MatchingFamily family;  // all perfect
    int attempted = 0;
    int completion_failures = 0;
};

// Near-decomposition into perfect rainbow matchings: near-decompose G, spread
// out, split the typical companion H into E / D_X / D_Y colour shares, then
// complete the matchings one by one, filtering reserves by used edges.
inline PerfectFamilyResult perfect_matching_decomposition(const EdgeColouredGraph& g,
                                                          const EdgeColouredGraph& companion,
                                                          const MatchingPipelineConfig& cfg,
                                                          Rng& rng) {
    for (const auto& [c, cls] : companion.colour_classes())
        if (g.colour_class_size(c) > 0)
            throw std::invalid_argument("companion shares colours with the base graph");

    PerfectFamilyResult res;
    auto family = near_matching_decomposition(g, cfg, rng);
    family = spread_out(g, family, cfg.spread_p);
    res.family.dummy_threshold = family.dummy_threshold;
    res.family.dummy_colours_used = family.dummy_colours_used;

    // Edges consumed so far (matchings plus completions).
    std::unordered_set<std::uint64_t> used_edges;
    for (const auto& m : family.matchings)
        for (const Edge& e : m.edges) used_edges.insert(pair_key(e.u, e.v));
    auto edge_used = [&](const Edge& e) { return used_edges.count(pair_key(e.u, e.v)) > 0; };

    int n = static_cast<int>(g.bipartition().x.size());
    for (auto& m : family.matchings) {
        ++res.attempted;
        // Booster: top the matching up from unused base edges first.
        {
            std::vector<Edge> pool_edges;
            for (const Edge& e : g.edges())
                if (!edge_used(e)) pool_edges.push_back(e);
            EdgeColouredGraph pool = g.with_edges(std::move(pool_edges));
            while (m.size() < n &&
                   rainbow_augment(m, pool, g.bipartition().x, rng, cfg.augment_depth)) {
            }
        }
        CompletionResult done;
        if (m.size() == n) {
            done.ok = true;
            done.matching = m;
        } else {
            // Reserves: the unused companion edges, re-split into the three
            // colour-disjoint shares on every retry.
            std::vector<Edge> pool_edges;
            for (const Edge& e : companion.edges())
                if (!edge_used(e)) pool_edges.push_back(e);
            EdgeColouredGraph pool = companion.with_edges(std::move(pool_edges));
            for (int attempt = 0; attempt < cfg.completion_retries && !done.ok; ++attempt) {
                std::unordered_set<int> ce, cdx, cdy;
                for (const auto& [c, cls] : pool.colour_classes()) {
                    double r = rng.real01();
                    if (r < cfg.share_e)
                        ce.insert(c);
                    else if (r < cfg.share_e + cfg.share_dx)
                        cdx.insert(c);
                    else
                        cdy.insert(c);
                }
                done = complete_matching(m, pool.restricted_to_colours(ce, true),
                                         pool.restricted_to_colours(cdx, true),
                                         pool.restricted_to_colours(cdy, true));
            }
        }
        if (!done.ok) {
            ++res.completion_failures;
            continue;
        }
        for (const Edge& e : done.matching.edges) used_edges.insert(pair_key(e.u, e.v));
        res.family.matchings.push_back(done.matching);
    }
    return res;
}

// True iff at least 2 eps n^2 colours are present; when true, at most
// (1 - eps) n colours can have >= (1 - eps) n edges (cross-checked exactly).
inline bool many_colours_gate(const EdgeColouredGraph& g, double eps) {
    int n = g.is_bipartite() ? static_cast<int>(g.bipartition().x.size()) : g.n_vertices();
    bool many = static_cast<double>(g.n_colours()) >= 2.0 * eps * n * n;
    if (many) {
        int large = 0;
        for (const auto& [c, cls] : g.colour_classes())
            if (static_cast<double>(cls.size()) >= (1.0 - eps) * n) ++large;
        if (static_cast<double>(large) > (1.0 - eps) * n)
            throw std::logic_error("many-colours implication failed");
    }
    return many;
}

struct TransversalPipelineResult {
    bool hypothesis_ok = false;
    std::string gate_message;
    MatchingFamily family;  // perfect rainbow matchings, i.e. transversals
    int attempted = 0;
    int failures = 0;
    double epsilon = 0.0;
};

// Few-large-colours hypothesis: at most (1 - 20 eps) n colours with at least
// (1 - 20 eps) n edges.
inline bool few_large_colours(const EdgeColouredGraph& g, double eps) {
    int n = static_cast<int>(g.bipartition().x.size());
    double threshold = (1.0 - 20.0 * eps) * n;
    int large = 0;
    for (const auto& [c, cls] : g.colour_classes())
        if (static_cast<double>(cls.size()) >= threshold) ++large;
    return static_cast<double>(large) <= threshold;
}

// End-to-end transversal pipeline on a properly coloured K_{n,n}: gate on the
// colour-size census, split off a typical colour sample, thin the large
// colours of the rest, extract an exactly regular subgraph, and run the
// perfect matching decomposition.
inline TransversalPipelineResult knn_transversal_pipeline(const EdgeColouredGraph& host,
                                                          double eps, Rng& rng,
                                                          double companion_fraction = 0.18,
                                                          MatchingPipelineConfig cfg = {}) {
    if (!host.is_bipartite()) throw std::invalid_argument("K_{n,n} host required");
    int n = static_cast<int>(host.bipartition().x.size());
    if (host.n_edges() != n * n) throw std::invalid_argument("host must be complete bipartite");
    if (!host.properly_coloured()) throw std::invalid_argument("host colouring is not proper");
    TransversalPipelineResult res;
    res.epsilon = eps;
    if (!few_large_colours(host, eps)) {
        res.gate_message = "hypothesis failed: too many large colours";
        return res;
    }
    res.hypothesis_ok = true;

    auto [companion, base] = sample_colour_subgraph(host, companion_fraction, rng);
    double thin_eps = std::min(0.049, std::max(eps, 2.0 / std::sqrt(static_cast<double>(n))));
    auto thinned = thin_large_colours(base, thin_eps, 1, rng);
    const EdgeColouredGraph& pruned = thinned.subgraph;

    auto done = perfect_matching_decomposition(pruned, companion, cfg, rng);
    res.family = std::move(done.family);
    res.attempted = done.attempted;
    res.failures = done.completion_failures;
    return res;
}

}  // namespace rainbow
