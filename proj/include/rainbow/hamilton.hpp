#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/matchings.hpp"
#include "rainbow/pseudorandom.hpp"
#include "rainbow/regularize.hpp"
#include "rainbow/rng.hpp"
#include "rainbow/structures.hpp"

namespace rainbow {

// ---- Explicit circulant decomposition ----

struct CirculantDecomposition {
    EdgeColouredGraph colouring;       // K_p with colour(ij) = i + j mod p
    std::vector<CycleFactor> cycles;   // (p-1)/2 rainbow Hamiltonian cycles
};

inline bool is_prime(int n) {
    if (n < 2) return false;
    for (int d = 2; static_cast<long long>(d) * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

// K_p on Z_p with colour(ij) = i + j mod p decomposes exactly into the
// rainbow Hamiltonian cycles C_i = {a (a+i)}, i = 1 .. (p-1)/2.
inline CirculantDecomposition circulant_decomposition(int p) {
    if (!is_prime(p) || p < 3) throw std::invalid_argument("odd prime >= 3 required");
    CirculantDecomposition out;
    out.colouring = complete_graph(p, [p](int i, int j) { return (i + j) % p; });
    for (int i = 1; i <= (p - 1) / 2; ++i) {
        CycleFactor f;
        std::vector<int> cyc;
        int a = 0;
        do {
            cyc.push_back(a);
            a = (a + i) % p;
        } while (a != 0);
        f.cycles.push_back(std::move(cyc));
        out.cycles.push_back(std::move(f));
    }
    return out;
}

// ---- Prime partition and near-design scaffolding ----

struct PrimePartition {
    bool ok = false;
    int k1 = 0, k2 = 0;
    std::vector<int> sizes;  // sum = n, each divisible by k1 or k2
    std::string note;
};

// Primes k1, k2 in [k, (1+eps) k] and a split n = sum n_i with every part
// divisible by k1 or k2 and roughly n / s parts, via extended-Euclid
// representation k1 z1 + k2 z2 = n.
inline PrimePartition prime_partition(int n, int k, double eps, int s_hat = 0) {
    PrimePartition res;
    if (n < k) {
        res.note = "n below k";
        return res;
    }
    std::vector<int> primes;
    for (int q = k; q <= static_cast<int>((1.0 + eps) * k) && static_cast<int>(primes.size()) < 2;
         ++q)
        if (is_prime(q)) primes.push_back(q);
    if (primes.empty()) {
        res.note = "no prime in [k, (1+eps)k]";
        return res;
    }
    int k1 = primes[0];
    int k2 = primes.size() > 1 ? primes[1] : primes[0];
    if (s_hat <= 0) s_hat = std::max(1, n / (3 * k1));
    double part_target = static_cast<double>(n) / s_hat;

    // z1 k1 + z2 k2 = n with z1, z2 >= 0 (k1 = k2 allowed when only one
    // prime fits; then k1 | n is required).
    long long z1 = -1, z2 = -1;
    if (k1 == k2) {
        if (n % k1 != 0) {
            res.note = "single prime does not divide n";
            return res;
        }
        z1 = n / k1;
        z2 = 0;
    } else {
        for (long long a = 0; a * k1 <= n; ++a)
            if ((n - a * k1) % k2 == 0) {
                // Prefer a balanced representation.
                if (z1 < 0 || std::abs(a * k1 - (n - a * k1)) <
                                  std::abs(z1 * k1 - (n - z1 * k1))) {
                    z1 = a;
                    z2 = (n - a * k1) / k2;
                }
            }
        if (z1 < 0) {
            res.note = "no representation n = z1 k1 + z2 k2";
            return res;
        }
    }
    // Group multiples into parts of size ~ n / s.
    auto emit = [&](long long units, int prime) {
        int per_part = std::max<long long>(1, std::llround(part_target / prime));
        while (units > 0) {
            long long take = std::min<long long>(per_part, units);
            res.sizes.push_back(static_cast<int>(take * prime));
            units -= take;
        }
    };
    emit(z1, k1);
    emit(z2, k2);
    res.k1 = k1;
    res.k2 = k2;
    res.ok = true;
    return res;
}

struct NearDesign {
    bool ok = false;
    // partitions[i] is a partition of the vertex index range [0, n).
    std::vector<std::vector<std::vector<int>>> partitions;
    std::vector<std::vector<int>> part_primes;  // prime dividing each part size
    int s = 0;
    double cooccurrence_ratio = 1.0;  // sampled max relative deviation
    std::string note;
};

// Family of partitions of [n] whose parts have prime-divisible sizes, each a
// random permutation of one base partition; pairwise co-occurrence is checked
// by sampling.
inline NearDesign near_design(int n, int s_hat, int k, double eps, Rng& rng,
                              int resample_cap = 5) {
    NearDesign design;
    auto pp = prime_partition(n, k, eps, s_hat);
    if (!pp.ok) {
        design.note = pp.note;
        return design;
    }
    design.s = static_cast<int>(pp.sizes.size());
    int families = std::max(1, static_cast<int>(std::ceil(
                                    design.s * design.s * std::log(static_cast<double>(n)) *
                                    std::log(static_cast<double>(n)))));
    double expected = static_cast<double>(families);
    // Expected pair co-occurrence count: families * sum (n_i/n)^2 approx.
    double psum = 0;
    for (int sz : pp.sizes)
        psum += (static_cast<double>(sz) / n) * (static_cast<double>(sz) / n);
    expected *= psum;

    for (int attempt = 0; attempt <= resample_cap; ++attempt) {
        design.partitions.clear();
        design.part_primes.clear();
        for (int f = 0; f < families; ++f) {
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            std::vector<std::vector<int>> parts;
            std::vector<int> primes;
            int at = 0;
            for (int sz : pp.sizes) {
                parts.emplace_back(perm.begin() + at, perm.begin() + at + sz);
                primes.push_back(sz % pp.k1 == 0 ? pp.k1 : pp.k2);
                at += sz;
            }
            design.partitions.push_back(std::move(parts));
            design.part_primes.push_back(std::move(primes));
        }
        // Sampled co-occurrence check.
        double worst = 0.0;
        int samples = std::min(200, n * (n - 1) / 2);
        bool degenerate = design.s == 1;
        for (int t = 0; t < samples && !degenerate; ++t) {
            int x = rng.index(n), y = rng.index(n);
            if (x == y) continue;
            int together = 0;
            for (const auto& partition : design.partitions)
                for (const auto& part : partition) {
                    bool hx = false, hy = false;
                    for (int v : part) {
                        hx |= v == x;
                        hy |= v == y;
                    }
                    if (hx && hy) ++together;
                }
            worst = std::max(worst, std::abs(together - expected) / std::max(1.0, expected));
        }
        design.cooccurrence_ratio = worst;
        if (degenerate || worst <= 0.5) {
            design.ok = true;
            return design;
        }
    }
    design.note = "co-occurrence deviation above tolerance";
    return design;
}

// ---- Cycle surgery ----

namespace detail {

// Rebuild vertex-disjoint cycles from a 2-regular edge set.
inline std::optional<std::vector<std::vector<int>>> cycles_from_edges(
    const std::vector<Edge>& edges) {
    std::unordered_map<int, std::vector<int>> adj;
    for (const Edge& e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    for (const auto& [v, nb] : adj)
        if (nb.size() != 2) return std::nullopt;
    std::unordered_set<int> seen;
    std::vector<std::vector<int>> cycles;
    for (const auto& [start, nb] : adj) {
        if (seen.count(start)) continue;
        std::vector<int> cyc;
        int prev = -1, at = start;
        do {
            cyc.push_back(at);
            seen.insert(at);
            const auto& next = adj[at];
            int go = (next[0] == prev) ? next[1] : next[0];
            prev = at;
            at = go;
        } while (at != start);
        if (cyc.size() < 3) return std::nullopt;
        cycles.push_back(std::move(cyc));
    }
    return cycles;
}

struct OrientedFactor {
    std::vector<std::vector<int>> cycles;
    std::unordered_map<int, int> succ;   // successor along the cycle
    std::unordered_map<int, int> pred;
    std::unordered_map<int, int> cycle_of;

    explicit OrientedFactor(const std::vector<std::vector<int>>& cs) : cycles(cs) {
        for (std::size_t i = 0; i < cycles.size(); ++i) {
            const auto& c = cycles[i];
            for (std::size_t j = 0; j < c.size(); ++j) {
                succ[c[j]] = c[(j + 1) % c.size()];
                pred[c[(j + 1) % c.size()]] = c[j];
                cycle_of[c[j]] = static_cast<int>(i);
            }
        }
    }
};

}  // namespace detail

struct RotationResult {
    bool ok = false;
    std::vector<std::vector<int>> cycles;  // new factor
    std::vector<Edge> added;               // <= 3 edges, with source colours
    std::vector<std::pair<int, int>> removed;
    std::string bottleneck;
};

// Joins two vertex-disjoint cycles into one using one edge from each of E, F,
// G: remove x0 y0 from the first cycle and z s(z), w s(w) from the second,
// add x0 s(z), y0 s(w), z w. Edges in `protect` are never removed.
inline RotationResult join_two_cycles(const std::vector<int>& c1, const std::vector<int>& c2,
                                      const EdgeColouredGraph& re, const EdgeColouredGraph& rf,
                                      const EdgeColouredGraph& rg,
                                      const std::vector<std::pair<int, int>>& protect) {
    RotationResult res;
    auto protected_edge = [&](int a, int b) {
        for (auto [u, v] : protect)
            if ((a == u && b == v) || (a == v && b == u)) return true;
        return false;
    };
    detail::OrientedFactor two({c1, c2});
    std::unordered_set<int> on_c1(c1.begin(), c1.end());
    std::unordered_set<int> on_c2(c2.begin(), c2.end());
    std::unordered_set<int> protected_vertices;
    for (auto [u, v] : protect) {
        protected_vertices.insert(u);
        protected_vertices.insert(v);
    }

    // Two-edge join (the degenerate rotation): remove one edge from each
    // cycle and reconnect with one E-edge and one F-edge across the cycles.
    for (const Edge& cross : re.edges()) {
        int a = -1, b = -1;
        if (on_c1.count(cross.u) && on_c2.count(cross.v)) {
            a = cross.u;
            b = cross.v;
        } else if (on_c1.count(cross.v) && on_c2.count(cross.u)) {
            a = cross.v;
            b = cross.u;
        } else {
            continue;
        }
        for (int sa : {two.succ.at(a), two.pred.at(a)}) {
            if (protected_edge(a, sa)) continue;
            for (int sb : {two.succ.at(b), two.pred.at(b)}) {
                if (protected_edge(b, sb)) continue;
                if (!rf.has_edge(sa, sb)) continue;
                if (re.colour_of(a, b) == rf.colour_of(sa, sb)) continue;
                std::vector<Edge> edges;
                auto push_cycle = [&](const std::vector<int>& c) {
                    for (std::size_t i = 0; i < c.size(); ++i)
                        edges.emplace_back(c[i], c[(i + 1) % c.size()], 0);
                };
                push_cycle(c1);
                push_cycle(c2);
                auto is_removed = [&](const Edge& e) {
                    auto match = [&](int p, int q) {
                        return e.u == std::min(p, q) && e.v == std::max(p, q);
                    };
                    return match(a, sa) || match(b, sb);
                };
                std::erase_if(edges, is_removed);
                edges.emplace_back(a, b, re.colour_of(a, b));
                edges.emplace_back(sa, sb, rf.colour_of(sa, sb));
                auto cycles = detail::cycles_from_edges(edges);
                if (!cycles || cycles->size() != 1) continue;
                res.ok = true;
                res.cycles = std::move(*cycles);
                res.added = {{a, b, re.colour_of(a, b)}, {sa, sb, rf.colour_of(sa, sb)}};
                res.removed = {{a, sa}, {b, sb}};
                res.bottleneck.clear();
                return res;
            }
        }
    }

    res.bottleneck = "no admissible start edge on the first cycle";
    for (int x0 : c1) {
        int y0 = two.succ.at(x0);
        if (protected_edge(x0, y0)) continue;
        // Candidate s(z): E-neighbours of x0 on c2 avoiding protected anchors.
        std::vector<int> sz_candidates, sw_candidates;
        for (auto [v, c] : re.neighbours(x0))
            if (on_c2.count(v) && !protected_vertices.count(v)) sz_candidates.push_back(v);
        for (auto [v, c] : rf.neighbours(y0))
            if (on_c2.count(v) && !protected_vertices.count(v)) sw_candidates.push_back(v);
        if (sz_candidates.empty() || sw_candidates.empty()) continue;
        res.bottleneck = "no linking edge in the third reserve";
        for (int sz : sz_candidates) {
            int z = two.pred.at(sz);
            if (protected_edge(z, sz)) continue;
            for (int sw : sw_candidates) {
                if (sw == sz) continue;
                int w = two.pred.at(sw);
                if (w == z || protected_edge(w, sw)) continue;
                if (!rg.has_edge(z, w)) continue;
                int ce = re.colour_of(x0, sz), cf = rf.colour_of(y0, sw), cg = rg.colour_of(z, w);
                if (ce == cf || ce == cg || cf == cg) continue;
                std::vector<Edge> edges;
                auto push_cycle = [&](const std::vector<int>& c) {
                    for (std::size_t i = 0; i < c.size(); ++i)
                        edges.emplace_back(c[i], c[(i + 1) % c.size()], 0);
                };
                push_cycle(c1);
                push_cycle(c2);
                auto is_removed = [&](const Edge& e) {
                    auto match = [&](int a, int b) {
                        return (e.u == std::min(a, b)) && (e.v == std::max(a, b));
                    };
                    return match(x0, y0) || match(z, sz) || match(w, sw);
                };
                std::erase_if(edges, is_removed);
                edges.emplace_back(x0, sz, re.colour_of(x0, sz));
                edges.emplace_back(y0, sw, rf.colour_of(y0, sw));
                edges.emplace_back(z, w, rg.colour_of(z, w));
                auto cycles = detail::cycles_from_edges(edges);
                if (!cycles || cycles->size() != 1) continue;
                res.ok = true;
                res.cycles = std::move(*cycles);
                res.added = {{x0, sz, re.colour_of(x0, sz)},
                             {y0, sw, rf.colour_of(y0, sw)},
                             {z, w, rg.colour_of(z, w)}};
                res.removed = {{x0, y0}, {z, sz}, {w, sw}};
                res.bottleneck.clear();
                return res;
            }
        }
    }
    return res;
}

// Absorbs the small cycle (index 0 in `cycles`) into the rest of the factor:
// remove its anchor edge x0 y0 plus z s(z), w s(w) elsewhere, add the
// out-arcs x0 -> s(z) of D_X and y0 -> s(w) of D_Y plus one E-edge z w. The
// anchors of the other cycles are avoided.
inline RotationResult absorb_small_cycle(const std::vector<std::vector<int>>& cycles,
                                         const std::vector<std::pair<int, int>>& anchors,
                                         const EdgeColouredGraph& re, const Digraph& dx,
                                         const Digraph& dy) {
    RotationResult res;
    if (cycles.size() < 2) {
        res.bottleneck = "nothing to absorb";
        return res;
    }
    detail::OrientedFactor fac(cycles);
    const auto& c0 = cycles[0];
    auto [x0, y0] = anchors[0];
    std::unordered_set<int> avoid(c0.begin(), c0.end());
    for (std::size_t i = 1; i < anchors.size(); ++i) {
        avoid.insert(anchors[i].first);
        avoid.insert(anchors[i].second);
    }
    std::vector<int> sz_candidates, sw_candidates;
    for (auto [v, c] : dx.out_neighbours(x0))
        if (fac.cycle_of.count(v) && !avoid.count(v)) sz_candidates.push_back(v);
    for (auto [v, c] : dy.out_neighbours(y0))
        if (fac.cycle_of.count(v) && !avoid.count(v)) sw_candidates.push_back(v);
    if (sz_candidates.empty() || sw_candidates.empty()) {
        res.bottleneck = "empty out-neighbourhood for an anchor endpoint";
        return res;
    }
    res.bottleneck = "no linking edge in the dense reserve";
    for (int sz : sz_candidates) {
        int z = fac.pred.at(sz);
        for (int sw : sw_candidates) {
            if (sw == sz) continue;
            int w = fac.pred.at(sw);
            if (w == z || z == sw || w == sz) continue;
            if (!re.has_edge(z, w)) continue;
            std::vector<Edge> edges;
            for (const auto& c : cycles)
                for (std::size_t i = 0; i < c.size(); ++i)
                    edges.emplace_back(c[i], c[(i + 1) % c.size()], 0);
            auto is_removed = [&](const Edge& e) {
                auto match = [&](int a, int b) {
                    return e.u == std::min(a, b) && e.v == std::max(a, b);
                };
                return match(x0, y0) || match(z, sz) || match(w, sw);
            };
            std::erase_if(edges, is_removed);
            int cx = -1, cy = -1;
            for (auto [v, c] : dx.out_neighbours(x0))
                if (v == sz) cx = c;
            for (auto [v, c] : dy.out_neighbours(y0))
                if (v == sw) cy = c;
            int cz = re.colour_of(z, w);
            if (cx == cy || cx == cz || cy == cz) continue;
            edges.emplace_back(x0, sz, cx);
            edges.emplace_back(y0, sw, cy);
            edges.emplace_back(z, w, re.colour_of(z, w));
            auto new_cycles = detail::cycles_from_edges(edges);
            if (!new_cycles || new_cycles->size() >= cycles.size()) continue;
            res.ok = true;
            res.cycles = std::move(*new_cycles);
            res.added = {{x0, sz, cx}, {y0, sw, cy}, {z, w, re.colour_of(z, w)}};
            res.removed = {{x0, y0}, {z, sz}, {w, sw}};
            res.bottleneck.clear();
            return res;
        }
    }
    return res;
}

struct HamiltonCompletionResult {
    bool ok = false;
    CycleFactor cycle;        // single Hamiltonian cycle on success
    std::vector<Edge> edges;  // its edges with colours
    int rotations = 0;
    std::string failure;
};

struct HamiltonCompletionConfig {
    double lambda = 0.1;   // two cycles of length >= lambda n join directly
    int anchor_resample_cap = 10;
};

// Turns a rainbow 2-factor into a rainbow Hamiltonian cycle by repeated
// rotations, filtering every reserve by the colours used so far. The factor's
// edges must carry their colours; reserves must be colour-disjoint from the
// factor and from each other.
inline HamiltonCompletionResult complete_hamiltonian(
    const std::vector<std::vector<int>>& factor_cycles,
    const std::unordered_map<std::uint64_t, int>& factor_colours, EdgeColouredGraph re1_full,
    EdgeColouredGraph re2_full, EdgeColouredGraph re3_full, Digraph dx_full, Digraph dy_full,
    Rng& rng, const HamiltonCompletionConfig& cfg = {}) {
    HamiltonCompletionResult res;
    std::vector<std::vector<int>> cycles = factor_cycles;
    std::unordered_map<std::uint64_t, int> colour_of = factor_colours;
    long long n = 0;
    for (const auto& c : cycles) n += static_cast<long long>(c.size());

    // Anchors: one uniformly random edge per cycle.
    std::vector<std::pair<int, int>> anchors;
    for (const auto& c : cycles) {
        int i = rng.index(static_cast<int>(c.size()));
        anchors.push_back({c[i], c[(i + 1) % c.size()]});
    }

    while (cycles.size() > 1) {
        // Reserves filtered by the colours of the current factor: colours
        // freed by earlier rotations become available again.
        std::unordered_set<int> current_colours;
        for (const auto& [k, c] : colour_of) current_colours.insert(c);
        EdgeColouredGraph re1 = re1_full.restricted_to_colours(current_colours, false);
        EdgeColouredGraph re2 = re2_full.restricted_to_colours(current_colours, false);
        EdgeColouredGraph re3 = re3_full.restricted_to_colours(current_colours, false);
        Digraph dx = dx_full.without_colours(current_colours);
        Digraph dy = dy_full.without_colours(current_colours);

        // Smallest cycle first.
        std::size_t smallest = 0, second = 1;
        for (std::size_t i = 1; i < cycles.size(); ++i)
            if (cycles[i].size() < cycles[smallest].size()) smallest = i;
        second = smallest == 0 ? 1 : 0;
        for (std::size_t i = 0; i < cycles.size(); ++i)
            if (i != smallest && cycles[i].size() < cycles[second].size()) second = i;

        // The three dense reserves play symmetric roles; try every assignment
        // and both cycle orders. Anchors are re-designated after every
        // rotation, so the join protects nothing.
        auto try_join = [&]() {
            RotationResult rot;
            std::vector<std::pair<int, int>> protect;
            const EdgeColouredGraph* rs[3] = {&re1, &re2, &re3};
            for (int first : {0, 1}) {
                const auto& ca = first == 0 ? cycles[smallest] : cycles[second];
                const auto& cb = first == 0 ? cycles[second] : cycles[smallest];
                for (int pe = 0; pe < 3 && !rot.ok; ++pe)
                    for (int pf = 0; pf < 3 && !rot.ok; ++pf) {
                        if (pf == pe) continue;
                        int pg = 3 - pe - pf;
                        rot = join_two_cycles(ca, cb, *rs[pe], *rs[pf], *rs[pg], protect);
                    }
                if (rot.ok) break;
            }
            // The join only saw the two cycles it merged; the rest of the
            // factor carries over untouched.
            if (rot.ok)
                for (std::size_t i = 0; i < cycles.size(); ++i)
                    if (i != smallest && i != second) rot.cycles.push_back(cycles[i]);
            return rot;
        };
        auto try_absorb = [&]() {
            RotationResult rot;
            std::vector<std::vector<int>> reordered{cycles[smallest]};
            std::vector<std::pair<int, int>> reanchors{anchors[smallest]};
            for (std::size_t i = 0; i < cycles.size(); ++i)
                if (i != smallest) {
                    reordered.push_back(cycles[i]);
                    reanchors.push_back(anchors[i]);
                }
            for (const EdgeColouredGraph* link : {&re1, &re2, &re3}) {
                rot = absorb_small_cycle(reordered, reanchors, *link, dx, dy);
                if (rot.ok) break;
            }
            return rot;
        };
        RotationResult rot;
        double lambda_n = cfg.lambda * static_cast<double>(n);
        if (static_cast<double>(cycles[smallest].size()) >= lambda_n) {
            rot = try_join();
            if (!rot.ok) rot = try_absorb();
        } else {
            rot = try_absorb();
            if (!rot.ok) rot = try_join();
        }
        if (!rot.ok) {
            res.failure = rot.bottleneck;
            return res;
        }
        ++res.rotations;
        for (auto [u, v] : rot.removed) colour_of.erase(pair_key(u, v));
        for (const Edge& e : rot.added) colour_of[pair_key(e.u, e.v)] = e.colour;
        cycles = rot.cycles;
        // Reassign anchors: keep surviving ones, every cycle needs one.
        std::vector<std::pair<int, int>> next_anchors;
        for (const auto& c : cycles) {
            std::pair<int, int> pick{-1, -1};
            for (std::size_t i = 0; i < c.size(); ++i) {
                int a = c[i], b = c[(i + 1) % c.size()];
                for (auto [u, v] : anchors)
                    if ((a == u && b == v) || (a == v && b == u)) pick = {u, v};
            }
            if (pick.first < 0) {
                int i = rng.index(static_cast<int>(c.size()));
                pick = {c[i], c[(i + 1) % c.size()]};
            }
            next_anchors.push_back(pick);
        }
        anchors = std::move(next_anchors);
    }
    res.ok = true;
    res.cycle.cycles = cycles;
    for (const auto& c : cycles)
        for (std::size_t i = 0; i < c.size(); ++i) {
            int u = c[i], v = c[(i + 1) % c.size()];
            res.edges.emplace_back(u, v, colour_of.at(pair_key(u, v)));
        }
    return res;
}

// ---- 2-factor pipelines ----

struct TwoFactorConfig {
    int k = 5;                        // minimum cycle length / number of parts
    int factor_attempt_cap = 0;       // 0 -> derive from degrees
    int partition_retries = 4;
    int matching_retries = 6;
    int factor_failure_tolerance = 5;  // consecutive failed factors before stopping
    MatchingPipelineConfig matching;  // used by the per-triple route
    // Sub-instances below this per-part size collapse to the sequential
    // desk-scale route (fresh partition per factor, online colour filter).
    int triple_route_min_part = 48;
};

struct TwoFactorResult {
    std::vector<CycleFactor> factors;
    std::vector<std::vector<Edge>> factor_edges;
    bool used_triple_route = false;
    int attempted = 0;
    std::string note;
};

// Assembles 2-factors from perfect matchings indexed by (a, b, c) triples
// along the rainbow Hamiltonian cycles of the circulant K_k: factor (i, t, j)
// is the union over edges ab of H_i of the j-th matching of triple
// (a, b, c(ab) + t mod k).
inline std::vector<std::vector<Edge>> assemble_two_factors(
    int k, const std::map<std::tuple<int, int, int>, std::vector<RainbowMatching>>& triples) {
    if (!is_prime(k)) throw std::invalid_argument("k must be prime for the circulant template");
    auto circ = circulant_decomposition(k);
    std::vector<std::vector<Edge>> factors;
    for (const auto& ham : circ.cycles) {
        const auto& order = ham.cycles[0];
        for (int t = 0; t < k; ++t) {
            // How many aligned matchings does every edge of this cycle have?
            int avail = -1;
            for (std::size_t i = 0; i < order.size(); ++i) {
                int a = order[i], b = order[(i + 1) % order.size()];
                int c = (circ.colouring.colour_of(a, b) + t) % k;
                auto it = triples.find({std::min(a, b), std::max(a, b), c});
                int have = it == triples.end() ? 0 : static_cast<int>(it->second.size());
                avail = avail < 0 ? have : std::min(avail, have);
            }
            for (int j = 0; j < avail; ++j) {
                std::vector<Edge> factor;
                for (std::size_t i = 0; i < order.size(); ++i) {
                    int a = order[i], b = order[(i + 1) % order.size()];
                    int c = (circ.colouring.colour_of(a, b) + t) % k;
                    const auto& m = triples.at({std::min(a, b), std::max(a, b), c})[j];
                    factor.insert(factor.end(), m.edges.begin(), m.edges.end());
                }
                factors.push_back(std::move(factor));
            }
        }
    }
    return factors;
}

namespace detail {

// Exact backtracking search for one perfect rainbow matching on small sides:
// most-constrained vertex first, randomized tie-breaks, node budget.
inline std::optional<RainbowMatching> exact_rainbow_matching(const EdgeColouredGraph& sub,
                                                             const std::vector<int>& side_a,
                                                             Rng& rng, long long budget) {
    std::unordered_set<int> used_colours;
    std::vector<char> used_vertex(sub.id_space(), 0);
    std::vector<char> matched_a(side_a.size(), 0);
    std::vector<Edge> chosen;
    long long nodes = 0;
    auto dfs = [&](auto&& self) -> bool {
        if (++nodes > budget) return false;
        int best = -1;
        std::size_t best_options = ~std::size_t{0};
        for (std::size_t i = 0; i < side_a.size(); ++i) {
            if (matched_a[i]) continue;
            std::size_t options = 0;
            for (auto [w, c] : sub.neighbours(side_a[i]))
                if (!used_vertex[w] && !used_colours.count(c)) ++options;
            if (options == 0) return false;
            if (options < best_options) {
                best_options = options;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) return true;  // everyone matched
        std::vector<std::pair<int, int>> cands;
        for (auto [w, c] : sub.neighbours(side_a[best]))
            if (!used_vertex[w] && !used_colours.count(c)) cands.push_back({w, c});
        rng.shuffle(cands);
        matched_a[best] = 1;
        for (auto [w, c] : cands) {
            used_vertex[w] = 1;
            used_colours.insert(c);
            chosen.emplace_back(side_a[best], w, c);
            if (self(self)) return true;
            chosen.pop_back();
            used_colours.erase(c);
            used_vertex[w] = 0;
        }
        matched_a[best] = 0;
        return false;
    };
    if (!dfs(dfs)) return std::nullopt;
    RainbowMatching m;
    m.edges = chosen;
    return m;
}

// Perfect rainbow matching between two vertex sets from a pool, avoiding the
// given colours. Small sides get the exact search; larger ones a randomized
// alternating-path search with restarts.
inline std::optional<RainbowMatching> pooled_perfect_matching(
    const EdgeColouredGraph& pool, const std::vector<int>& side_a, const std::vector<int>& side_b,
    const std::unordered_set<int>& banned_colours, Rng& rng, int tries) {
    auto sub = pool.between(side_a, side_b).restricted_to_colours(banned_colours, false);
    int target = static_cast<int>(side_a.size());
    if (target <= 10) return exact_rainbow_matching(sub, side_a, rng, 50000);
    for (int attempt = 0; attempt < tries; ++attempt) {
        RainbowMatching m;
        while (m.size() < target && rainbow_augment(m, sub, side_a, rng, 6, true)) {
        }
        if (m.size() == target) return m;
        // Finish stubborn gaps exactly when close.
        if (target - m.size() <= 10) {
            std::unordered_set<int> banned2(banned_colours.begin(), banned_colours.end());
            for (const Edge& e : m.edges) banned2.insert(e.colour);
            std::vector<int> rest_a;
            std::vector<char> covered(sub.id_space(), 0);
            for (const Edge& e : m.edges) covered[e.u] = covered[e.v] = 1;
            for (int v : side_a)
                if (!covered[v]) rest_a.push_back(v);
            std::vector<int> rest_b;
            for (int v : side_b)
                if (!covered[v]) rest_b.push_back(v);
            auto tail = pool.between(rest_a, rest_b).restricted_to_colours(banned2, false);
            auto fin = exact_rainbow_matching(tail, rest_a, rng, 20000);
            if (fin) {
                for (const Edge& e : fin->edges) m.edges.push_back(e);
                return m;
            }
        }
    }
    return std::nullopt;
}

}  // namespace detail

// Near-decomposition into rainbow 2-factors with cycles of length >= k. The
// vertex set is partitioned into k classes and each factor is a union of k
// colour-disjoint perfect matchings along the circulant template. Large
// sub-instances run the per-triple decomposition with the prime template;
// small ones collapse to a sequential route with a fresh random partition per
// factor (flagged in the result).
inline TwoFactorResult two_factor_decomposition(const EdgeColouredGraph& g,
                                                const EdgeColouredGraph& companion,
                                                const TwoFactorConfig& cfg, Rng& rng) {
    TwoFactorResult res;
    int n = g.n_vertices();
    int k = cfg.k;
    if (n == 0 || k < 3) {
        res.note = "degenerate instance";
        return res;
    }
    // When k does not divide n, split the vertex count into prime-divisible
    // chunks: every factor is then a union of per-chunk factors sharing one
    // global colour budget, and all cycles keep length >= k.
    std::vector<std::pair<int, int>> chunks;  // (size, parts within the chunk)
    if (n % k == 0) {
        chunks.push_back({n, k});
    } else {
        auto pp = prime_partition(n, k, 0.75);
        if (!pp.ok) {
            res.note = "no prime-divisible vertex split for k=" + std::to_string(k) + ": " +
                       pp.note;
            return res;
        }
        for (int sz : pp.sizes) chunks.push_back({sz, sz % pp.k1 == 0 ? pp.k1 : pp.k2});
    }
    int m = n / k;

    // Union pool of base and companion edges (edge-disjoint by construction).
    std::vector<Edge> pool_edges = g.edges();
    pool_edges.insert(pool_edges.end(), companion.edges().begin(), companion.edges().end());
    EdgeColouredGraph pool(g.id_space(), pool_edges, std::nullopt, g.vertices());

    if (chunks.size() == 1 && m >= cfg.triple_route_min_part && is_prime(k)) {
        // Triple route: one random vertex and colour partition, a
        // perfect-matching family per (V_a, V_b, C_c) triple, circulant
        // assembly.
        res.used_triple_route = true;
        std::vector<int> verts = g.vertices();
        rng.shuffle(verts);
        std::vector<std::vector<int>> parts(k);
        for (int i = 0; i < n; ++i) parts[i % k].push_back(verts[i]);
        std::unordered_map<int, int> colour_part;
        for (const auto& [c, cls] : pool.colour_classes()) colour_part[c] = rng.index(k);
        std::map<std::tuple<int, int, int>, std::vector<RainbowMatching>> triples;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                for (int c = 0; c < k; ++c) {
                    std::unordered_set<int> keep;
                    for (const auto& [col, part] : colour_part)
                        if (part == c) keep.insert(col);
                    auto base_sub =
                        g.between(parts[a], parts[b]).restricted_to_colours(keep, true);
                    auto comp_sub =
                        companion.between(parts[a], parts[b]).restricted_to_colours(keep, true);
                    Rng sub_rng = rng.split(a * k * k + b * k + c);
                    auto fam = perfect_matching_decomposition(base_sub, comp_sub, cfg.matching,
                                                              sub_rng);
                    triples[{a, b, c}] = fam.family.matchings;
                }
        auto factors = assemble_two_factors(k, triples);
        for (auto& edges : factors) {
            auto cycles = detail::cycles_from_edges(edges);
            if (!cycles) continue;
            CycleFactor f;
            f.cycles = *cycles;
            res.factors.push_back(f);
            res.factor_edges.push_back(std::move(edges));
        }
        res.attempted = static_cast<int>(factors.size());
        return res;
    }

    // Sequential desk-scale route.
    int cap = cfg.factor_attempt_cap;
    if (cap <= 0) cap = std::max(1, pool.min_degree() / 2);
    std::unordered_set<std::uint64_t> used;
    int consecutive_failures = 0;
    for (int f = 0; f < cap; ++f) {
        ++res.attempted;
        bool built = false;
        for (int attempt = 0; attempt < cfg.partition_retries && !built; ++attempt) {
            std::vector<int> verts = g.vertices();
            rng.shuffle(verts);
            // Remaining pool as a graph.
            std::vector<Edge> live;
            for (const Edge& e : pool.edges())
                if (!used.count(pair_key(e.u, e.v))) live.push_back(e);
            EdgeColouredGraph live_pool(g.id_space(), live, std::nullopt, g.vertices());
            // All part pairs of all chunks, in random order; matchings are
            // found pair by pair with bounded backtracking so a starved late
            // pair can force earlier pairs to re-draw.
            std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
            int offset = 0;
            for (auto [chunk_size, chunk_parts] : chunks) {
                std::vector<std::vector<int>> parts(chunk_parts);
                for (int i = 0; i < chunk_size; ++i)
                    parts[i % chunk_parts].push_back(verts[offset + i]);
                offset += chunk_size;
                for (int a = 0; a < chunk_parts; ++a)
                    pairs.push_back({parts[a], parts[(a + 1) % chunk_parts]});
            }
            rng.shuffle(pairs);
            std::unordered_set<int> factor_colours;
            std::vector<std::vector<Edge>> stack;
            long long backtracks = 0;
            auto build = [&](auto&& self, std::size_t at) -> bool {
                if (at == pairs.size()) return true;
                int alternatives = backtracks > 200 ? 1 : 3;
                for (int alt = 0; alt < alternatives; ++alt) {
                    auto match = detail::pooled_perfect_matching(live_pool, pairs[at].first,
                                                                 pairs[at].second, factor_colours,
                                                                 rng, cfg.matching_retries);
                    if (!match) break;  // pair unsatisfiable under current bans
                    for (const Edge& e : match->edges) factor_colours.insert(e.colour);
                    stack.push_back(match->edges);
                    if (self(self, at + 1)) return true;
                    for (const Edge& e : stack.back()) factor_colours.erase(e.colour);
                    stack.pop_back();
                    ++backtracks;
                }
                return false;
            };
            bool ok = build(build, 0);
            if (!ok) continue;
            std::vector<Edge> factor;
            for (const auto& m : stack)
                factor.insert(factor.end(), m.begin(), m.end());
            auto cycles = detail::cycles_from_edges(factor);
            if (!cycles) continue;
            for (const Edge& e : factor) used.insert(pair_key(e.u, e.v));
            CycleFactor cf;
            cf.cycles = *cycles;
            res.factors.push_back(cf);
            res.factor_edges.push_back(std::move(factor));
            built = true;
        }
        if (built) {
            consecutive_failures = 0;
        } else if (++consecutive_failures > cfg.factor_failure_tolerance) {
            break;  // pool exhausted for this template
        }
    }
    return res;
}

// ---- Hamiltonian pipeline ----

struct HamiltonianPipelineConfig {
    double companion_fraction = 0.22;  // colour share for each of J1, J2
    double share_e = 0.16;             // three dense reserves from J2
    double share_d = 0.26;             // two directed reserves from J2
    TwoFactorConfig two_factor;
    HamiltonCompletionConfig completion;
    int completion_retries = 4;
    // The caller vouches for the boundedness gap (e.g. after vertex
    // sampling): skip the colour census gate, the thinning and the
    // regularization.
    bool assume_bounded = false;
};

struct HamiltonianPipelineResult {
    bool hypothesis_ok = false;
    std::string gate_message;
    std::vector<CycleFactor> cycles;          // verified Hamiltonian cycles
    std::vector<std::vector<Edge>> cycle_edges;
    int factors_built = 0;
    int completion_failures = 0;
    bool desk_route = false;
};

// Gate for K_n hosts: at most (1 - eps) n colours with >= (1 - eps) n / 2 edges.
inline bool few_large_colours_general(const EdgeColouredGraph& g, double eps) {
    int n = g.n_vertices();
    int large = 0;
    for (const auto& [c, cls] : g.colour_classes())
        if (static_cast<double>(cls.size()) >= (1.0 - eps) * n / 2) ++large;
    return static_cast<double>(large) <= (1.0 - eps) * n;
}

// Near-decomposition of a properly coloured K_n (or dense general graph) into
// rainbow Hamiltonian cycles: split off two typical colour samples, thin and
// regularize the rest, decompose into 2-factors with the first sample, then
// complete each factor with reserves drawn from the second.
inline HamiltonianPipelineResult hamiltonian_decomposition(const EdgeColouredGraph& host,
                                                           double eps, Rng& rng,
                                                           HamiltonianPipelineConfig cfg = {}) {
    HamiltonianPipelineResult res;
    if (!cfg.assume_bounded && !few_large_colours_general(host, eps)) {
        res.gate_message = "hypothesis failed: too many large colours";
        return res;
    }
    res.hypothesis_ok = true;
    int n = host.n_vertices();

    auto [j1, rest1] = sample_colour_subgraph(host, cfg.companion_fraction, rng);
    double renorm = cfg.companion_fraction / std::max(1e-9, 1.0 - cfg.companion_fraction);
    auto [j2, base0] = sample_colour_subgraph(rest1, renorm, rng);

    // Thin the large colours of the base and extract an even-regular core.
    EdgeColouredGraph base = base0;
    if (!cfg.assume_bounded) {
        double thin_eps =
            std::min(0.049, std::max(eps / 6.0, 2.0 / std::sqrt(static_cast<double>(n))));
        auto thinned = thin_large_colours(base0, thin_eps, 2, rng);
        base = thinned.subgraph;
        int delta = base.min_degree();
        if (2 * delta >= base.n_vertices()) {
            double bound =
                0.5 * (delta + std::sqrt(static_cast<double>(base.n_vertices()) *
                                         (2.0 * delta - base.n_vertices())));
            int r = static_cast<int>(bound);
            r -= r % 2;
            while (r > 0) {
                auto reg = regular_general_subgraph(base, r, rng);
                if (reg.feasible) {
                    base = reg.subgraph;
                    break;
                }
                r -= 2;
            }
        }
    }

    auto factors = two_factor_decomposition(base, j1, cfg.two_factor, rng);
    res.factors_built = static_cast<int>(factors.factors.size());
    res.desk_route = !factors.used_triple_route;

    // Completion reserves come from the leftover pool: J2 plus every unused
    // host edge, filtered per factor to unused colours and re-split into the
    // five colour-disjoint shares on every retry.
    std::unordered_set<std::uint64_t> used;
    for (const auto& fe : factors.factor_edges)
        for (const Edge& e : fe) used.insert(pair_key(e.u, e.v));

    for (std::size_t i = 0; i < factors.factors.size(); ++i) {
        std::unordered_map<std::uint64_t, int> colour_of;
        std::unordered_set<int> factor_colours;
        for (const Edge& e : factors.factor_edges[i]) {
            colour_of[pair_key(e.u, e.v)] = e.colour;
            factor_colours.insert(e.colour);
        }
        std::vector<Edge> pool_edges;
        for (const Edge& e : host.edges())
            if (!used.count(pair_key(e.u, e.v))) pool_edges.push_back(e);
        EdgeColouredGraph pool(host.id_space(), pool_edges, std::nullopt, host.vertices());
        bool done = false;
        for (int attempt = 0; attempt < cfg.completion_retries && !done; ++attempt) {
            Rng sub = rng.split(1000 + i * 13 + attempt);
            // The rotations check colour-distinctness of the added edges
            // directly, so the whole pool serves as every reserve; the two
            // directed reserves are opposite orientations, so each pool edge
            // is available out of both endpoints.
            std::vector<Arc> fwd, bwd;
            for (const Edge& e : pool.edges()) {
                if (sub.bernoulli(0.5)) {
                    fwd.push_back({e.u, e.v, e.colour});
                    bwd.push_back({e.v, e.u, e.colour});
                } else {
                    fwd.push_back({e.v, e.u, e.colour});
                    bwd.push_back({e.u, e.v, e.colour});
                }
            }
            Digraph dx(pool.id_space(), fwd), dy(pool.id_space(), bwd);
            auto completed = complete_hamiltonian(factors.factors[i].cycles, colour_of, pool,
                                                  pool, pool, dx, dy, sub, cfg.completion);
            if (!completed.ok) continue;
            auto rep = verify_hamiltonian_cycle(completed.cycle, host);
            VerificationReport rainbow_rep;
            detail::check_rainbow(completed.edges, rainbow_rep);
            if (!rep.ok() || !rainbow_rep.ok()) continue;
            for (const Edge& e : completed.edges) used.insert(pair_key(e.u, e.v));
            res.cycles.push_back(completed.cycle);
            res.cycle_edges.push_back(completed.edges);
            done = true;
        }
        if (!done) ++res.completion_failures;
    }
    return res;
}

}  // namespace rainbow
