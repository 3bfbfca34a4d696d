#pragma once

#include <stdexcept>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/latin.hpp"
#include "rainbow/rng.hpp"

namespace rainbow {

// Proper n-colouring of K_{n,n} whose colour classes are perfect matchings:
// colour(x_i, y_j) = (i + j) mod n.
inline EdgeColouredGraph one_factorized_knn(int n) {
    return complete_bipartite(n, [n](int i, int j) { return (i + j) % n; });
}

// Proper edge-colouring of K_n by the round-robin construction. Even n gives
// n-1 perfect-matching classes; odd n gives n near-perfect classes.
inline EdgeColouredGraph one_factorized_kn(int n) {
    if (n % 2 == 1) return complete_graph(n, [n](int i, int j) { return (i + j) % n; });
    // Circle method: vertex n-1 fixed, the rest on a cycle of length n-1.
    int m = n - 1;
    std::vector<Edge> edges;
    edges.reserve(n * (n - 1) / 2);
    for (int r = 0; r < m; ++r) {
        edges.emplace_back(n - 1, r, r);
        for (int i = 1; i <= n / 2 - 1; ++i) {
            int a = (r + i) % m, b = (r - i + m) % m;
            edges.emplace_back(a, b, r);
        }
    }
    return EdgeColouredGraph(n, std::move(edges));
}

// The rainbow-Hamiltonian-decomposable colouring of K_p: colour(ij) = i+j mod p.
inline EdgeColouredGraph circulant_colouring(int p) {
    return complete_graph(p, [p](int i, int j) { return (i + j) % p; });
}

// Generalized Latin square with roughly target_symbols symbols, produced by
// splitting cells off the colour classes of the cyclic square. Any subset of
// a symbol class can take a fresh symbol without breaking the row/column
// property, so each split adds exactly one symbol.
inline GeneralizedLatinSquare random_generalized_square(int n, int target_symbols, Rng& rng) {
    if (target_symbols < n) throw std::invalid_argument("K_{n,n} needs at least n symbols");
    if (target_symbols > n * n) throw std::invalid_argument("at most n^2 symbols possible");
    GeneralizedLatinSquare s = GeneralizedLatinSquare::cyclic(n);
    std::vector<int> class_size(n, n);
    std::vector<std::pair<int, int>> cells;
    cells.reserve(n * n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) cells.push_back({r, c});
    rng.shuffle(cells);
    int symbols = n;
    int next_symbol = n;
    std::size_t cursor = 0;
    while (symbols < target_symbols && cursor < cells.size()) {
        auto [r, c] = cells[cursor++];
        int old = s.cell[r][c];
        if (old < n && class_size[old] <= 1) continue;
        if (old >= n) continue;  // already split off
        s.cell[r][c] = next_symbol++;
        --class_size[old];
        ++symbols;
    }
    return s;
}

// Instance with `removed` colour classes deleted (largest colour ids first),
// as used to create boundedness slack in pipeline benchmarks.
inline EdgeColouredGraph delete_colour_classes(const EdgeColouredGraph& g, int removed) {
    std::vector<int> ids;
    for (const auto& [c, cls] : g.colour_classes()) ids.push_back(c);
    std::sort(ids.rbegin(), ids.rend());
    std::unordered_set<int> gone(ids.begin(), ids.begin() + std::min<std::size_t>(removed, ids.size()));
    return g.restricted_to_colours(gone, false);
}

}  // namespace rainbow
