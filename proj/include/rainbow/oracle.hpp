#pragma once

#include <algorithm>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/latin.hpp"
#include "rainbow/structures.hpp"

namespace rainbow {

// Brute-force baselines. Every pipeline output on a small instance must live
// inside the witness universe these produce, and pipeline counts must never
// beat the optima. Deterministic and seed-free.
struct OracleResult {
    long long optimum = 0;
    std::vector<std::vector<Edge>> witnesses;
    long long enumerated = 0;
};

namespace oracle_limits {
constexpr int kMaxRainbowMatchingSide = 8;
constexpr int kMaxTransversalSide = 7;
constexpr int kMaxDisjointPackingSide = 5;
constexpr int kMaxHamiltonianVertices = 10;
}  // namespace oracle_limits

namespace detail {

// Branch on the lowest-indexed free vertex: leave it unmatched, or match it
// to a free neighbour of unused colour. Each matching is visited once.
inline void max_rainbow_matching_dfs(const EdgeColouredGraph& g,
                                     const std::vector<int>& order, std::size_t pos,
                                     std::vector<Edge>& chosen, std::vector<char>& used_vertex,
                                     std::unordered_set<int>& used_colour, OracleResult& result) {
    ++result.enumerated;
    while (pos < order.size() && used_vertex[order[pos]]) ++pos;
    if (pos == order.size()) {
        if (static_cast<long long>(chosen.size()) > result.optimum) {
            result.optimum = static_cast<long long>(chosen.size());
            result.witnesses.clear();
        }
        if (static_cast<long long>(chosen.size()) == result.optimum)
            result.witnesses.push_back(chosen);
        return;
    }
    long long free_left = 0;
    for (std::size_t i = pos; i < order.size(); ++i)
        if (!used_vertex[order[i]]) ++free_left;
    // Can neither beat nor tie the optimum: prune.
    if (static_cast<long long>(chosen.size()) + free_left / 2 < result.optimum) return;
    int v = order[pos];
    for (auto [w, c] : g.neighbours(v)) {
        if (used_vertex[w] || used_colour.count(c)) continue;
        used_vertex[v] = used_vertex[w] = 1;
        used_colour.insert(c);
        chosen.emplace_back(v, w, c);
        max_rainbow_matching_dfs(g, order, pos + 1, chosen, used_vertex, used_colour, result);
        chosen.pop_back();
        used_colour.erase(c);
        used_vertex[v] = used_vertex[w] = 0;
    }
    used_vertex[v] = 1;
    max_rainbow_matching_dfs(g, order, pos + 1, chosen, used_vertex, used_colour, result);
    used_vertex[v] = 0;
}

}  // namespace detail

// Exact maximum rainbow matching with all optimal witnesses.
inline OracleResult max_rainbow_matching(const EdgeColouredGraph& g) {
    int side = g.is_bipartite() ? static_cast<int>(g.bipartition().x.size()) : g.n_vertices() / 2;
    if (side > oracle_limits::kMaxRainbowMatchingSide)
        throw std::invalid_argument("instance too large for rainbow matching oracle");
    OracleResult result;
    std::vector<Edge> chosen;
    std::vector<char> used_vertex(g.id_space(), 0);
    std::unordered_set<int> used_colour;
    detail::max_rainbow_matching_dfs(g, g.vertices(), 0, chosen, used_vertex, used_colour,
                                     result);
    for (auto& w : result.witnesses) std::sort(w.begin(), w.end());
    std::sort(result.witnesses.begin(), result.witnesses.end());
    result.witnesses.erase(std::unique(result.witnesses.begin(), result.witnesses.end()),
                           result.witnesses.end());
    return result;
}

// All full transversals of a square, as perfect rainbow matchings of the
// associated K_{n,n} (edge x_i - y_{perm(i)}). Column choice per row with
// symbol-set pruning.
inline OracleResult enumerate_transversals(const GeneralizedLatinSquare& square) {
    if (square.n > oracle_limits::kMaxTransversalSide)
        throw std::invalid_argument("instance too large for transversal oracle");
    OracleResult result;
    int n = square.n;
    std::vector<int> perm(n, -1);
    std::vector<char> col_used(n, 0);
    std::unordered_set<int> symbols;
    std::vector<Edge> edges;
    auto dfs = [&](auto&& self, int row) -> void {
        ++result.enumerated;
        if (row == n) {
            result.witnesses.push_back(edges);
            return;
        }
        for (int c = 0; c < n; ++c) {
            if (col_used[c] || symbols.count(square.at(row, c))) continue;
            col_used[c] = 1;
            symbols.insert(square.at(row, c));
            edges.emplace_back(row, n + c, square.at(row, c));
            self(self, row + 1);
            edges.pop_back();
            symbols.erase(square.at(row, c));
            col_used[c] = 0;
        }
    };
    dfs(dfs, 0);
    result.optimum = static_cast<long long>(result.witnesses.size());
    return result;
}

// Maximum pairwise-disjoint packing of full transversals (exact set packing
// by branch and bound over the witness list).
inline OracleResult max_disjoint_transversals(const GeneralizedLatinSquare& square) {
    if (square.n > oracle_limits::kMaxDisjointPackingSide)
        throw std::invalid_argument("instance too large for disjoint transversal oracle");
    OracleResult all = enumerate_transversals(square);
    OracleResult result;
    result.enumerated = all.enumerated;
    int n = square.n;
    // Cell bitmask per transversal: cell (r, c) -> bit r * n + c.
    std::vector<std::uint64_t> masks;
    masks.reserve(all.witnesses.size());
    for (const auto& w : all.witnesses) {
        std::uint64_t m = 0;
        for (const Edge& e : w) m |= 1ULL << (e.u * n + (e.v - n));
        masks.push_back(m);
    }
    std::vector<int> chosen, best;
    auto dfs = [&](auto&& self, std::size_t idx, std::uint64_t used) -> void {
        if (chosen.size() > best.size()) best = chosen;
        if (chosen.size() + (masks.size() - idx) <= best.size()) return;
        for (std::size_t i = idx; i < masks.size(); ++i) {
            if (masks[i] & used) continue;
            chosen.push_back(static_cast<int>(i));
            self(self, i + 1, used | masks[i]);
            chosen.pop_back();
        }
    };
    dfs(dfs, 0, 0);
    result.optimum = static_cast<long long>(best.size());
    for (int i : best) result.witnesses.push_back(all.witnesses[i]);
    return result;
}

// Exhaustive rainbow Hamiltonian cycle enumeration.
inline OracleResult rainbow_hamiltonian_exists(const EdgeColouredGraph& g) {
    if (g.n_vertices() > oracle_limits::kMaxHamiltonianVertices)
        throw std::invalid_argument("instance too large for Hamiltonian oracle");
    OracleResult result;
    const auto& verts = g.vertices();
    int n = static_cast<int>(verts.size());
    if (n < 3) return result;
    int start = verts[0];
    std::vector<int> path{start};
    std::vector<char> visited(g.id_space(), 0);
    visited[start] = 1;
    std::unordered_set<int> colours;
    auto dfs = [&](auto&& self) -> void {
        ++result.enumerated;
        int last = path.back();
        if (static_cast<int>(path.size()) == n) {
            int c = g.colour_of(last, start);
            if (g.has_edge(last, start) && !colours.count(c) && path[1] < path[n - 1]) {
                std::vector<Edge> cycle;
                for (int i = 0; i < n; ++i) {
                    int u = path[i], v = path[(i + 1) % n];
                    cycle.emplace_back(u, v, g.colour_of(u, v));
                }
                result.witnesses.push_back(std::move(cycle));
            }
            return;
        }
        for (auto [w, c] : g.neighbours(last)) {
            if (visited[w] || colours.count(c)) continue;
            visited[w] = 1;
            colours.insert(c);
            path.push_back(w);
            self(self);
            path.pop_back();
            colours.erase(c);
            visited[w] = 0;
        }
    };
    dfs(dfs);
    result.optimum = static_cast<long long>(result.witnesses.size());
    return result;
}

}  // namespace rainbow
