#pragma once

#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "rainbow/core.hpp"

namespace rainbow {

// n x n array of symbol ids with no symbol repeated in a row or column.
// Symbols are arbitrary non-negative ints; an n-symbol square is a Latin
// square, more symbols give a generalized one.
struct GeneralizedLatinSquare {
    int n = 0;
    std::vector<std::vector<int>> cell;

    GeneralizedLatinSquare() = default;
    explicit GeneralizedLatinSquare(std::vector<std::vector<int>> rows)
        : n(static_cast<int>(rows.size())), cell(std::move(rows)) {}

    int at(int r, int c) const { return cell[r][c]; }

    bool is_valid(std::string* why = nullptr) const {
        for (int r = 0; r < n; ++r) {
            if (static_cast<int>(cell[r].size()) != n) {
                if (why) *why = "row " + std::to_string(r) + " has wrong length";
                return false;
            }
        }
        for (int r = 0; r < n; ++r) {
            std::unordered_set<int> seen;
            for (int c = 0; c < n; ++c) {
                if (cell[r][c] < 0) {
                    if (why) *why = "negative symbol";
                    return false;
                }
                if (!seen.insert(cell[r][c]).second) {
                    if (why) *why = "symbol repeated in row " + std::to_string(r);
                    return false;
                }
            }
        }
        for (int c = 0; c < n; ++c) {
            std::unordered_set<int> seen;
            for (int r = 0; r < n; ++r)
                if (!seen.insert(cell[r][c]).second) {
                    if (why) *why = "symbol repeated in column " + std::to_string(c);
                    return false;
                }
        }
        return true;
    }

    bool is_symmetric() const {
        for (int r = 0; r < n; ++r)
            for (int c = r + 1; c < n; ++c)
                if (cell[r][c] != cell[c][r]) return false;
        return true;
    }

    int n_symbols() const {
        std::unordered_set<int> s;
        for (const auto& row : cell) s.insert(row.begin(), row.end());
        return static_cast<int>(s.size());
    }

    friend bool operator==(const GeneralizedLatinSquare& a, const GeneralizedLatinSquare& b) {
        return a.n == b.n && a.cell == b.cell;
    }

    // Cayley table of Z_n (addition), the canonical Latin square.
    static GeneralizedLatinSquare cyclic(int n) {
        std::vector<std::vector<int>> rows(n, std::vector<int>(n));
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) rows[r][c] = (r + c) % n;
        return GeneralizedLatinSquare(std::move(rows));
    }
};

// Square -> properly coloured K_{n,n}: colour(x_i y_j) = s_ij.
inline EdgeColouredGraph square_to_bipartite(const GeneralizedLatinSquare& square) {
    std::string why;
    if (!square.is_valid(&why))
        throw std::invalid_argument("not a generalized Latin square: " + why);
    return complete_bipartite(square.n, [&](int i, int j) { return square.at(i, j); });
}

// Inverse of square_to_bipartite. Rejects graphs which are not complete
// balanced bipartite with a proper colouring.
inline GeneralizedLatinSquare bipartite_to_square(const EdgeColouredGraph& g) {
    if (!g.is_bipartite()) throw std::invalid_argument("graph is not bipartite");
    const auto& b = g.bipartition();
    int n = static_cast<int>(b.x.size());
    if (static_cast<int>(b.y.size()) != n) throw std::invalid_argument("parts are unbalanced");
    if (g.n_edges() != n * n) throw std::invalid_argument("graph is not complete bipartite");
    if (!g.properly_coloured()) throw std::invalid_argument("colouring is not proper");
    std::vector<std::vector<int>> rows(n, std::vector<int>(n, -1));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int c = g.colour_of(b.x[i], b.y[j]);
            if (c < 0) throw std::invalid_argument("graph is not complete bipartite");
            rows[i][j] = c;
        }
    GeneralizedLatinSquare s(std::move(rows));
    std::string why;
    if (!s.is_valid(&why)) throw std::invalid_argument("colouring does not form a square: " + why);
    return s;
}

// Symmetric square -> properly coloured K_n: colour(ij) = s_ij for i < j.
inline EdgeColouredGraph symmetric_square_to_complete(const GeneralizedLatinSquare& square) {
    std::string why;
    if (!square.is_valid(&why))
        throw std::invalid_argument("not a generalized Latin square: " + why);
    if (!square.is_symmetric()) throw std::invalid_argument("square is not symmetric");
    auto g = complete_graph(square.n, [&](int i, int j) { return square.at(i, j); });
    if (!g.properly_coloured())
        throw std::invalid_argument("symmetric square does not induce a proper colouring");
    return g;
}

}  // namespace rainbow
