#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rainbow/core.hpp"
#include "rainbow/latin.hpp"
#include "rainbow/structures.hpp"

namespace rainbow {

using nlohmann::json;

// ---- Square files: CSV, one row per line, non-negative integer symbols ----

inline std::string square_to_csv(const GeneralizedLatinSquare& s) {
    std::ostringstream out;
    for (int r = 0; r < s.n; ++r) {
        for (int c = 0; c < s.n; ++c) {
            if (c) out << ',';
            out << s.at(r, c);
        }
        out << '\n';
    }
    return out.str();
}

inline GeneralizedLatinSquare square_from_csv(std::istream& in) {
    std::vector<std::vector<int>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<int> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                row.push_back(std::stoi(tok));
            } catch (const std::exception&) {
                throw std::runtime_error("bad symbol '" + tok + "' in square file");
            }
        }
        rows.push_back(std::move(row));
    }
    GeneralizedLatinSquare s(std::move(rows));
    std::string why;
    if (!s.is_valid(&why)) throw std::runtime_error("invalid square file: " + why);
    return s;
}

inline GeneralizedLatinSquare load_square(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return square_from_csv(in);
}

inline void save_square(const GeneralizedLatinSquare& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << square_to_csv(s);
}

// ---- Coloured-graph files ----
// Header: `n <count> [bipartite]`, then one `u v c` line per edge.
// Bipartite graphs use per-side indices 0..n-1 (u on the X side, v on Y).

inline std::string graph_to_text(const EdgeColouredGraph& g) {
    std::ostringstream out;
    if (g.is_bipartite()) {
        int n = static_cast<int>(g.bipartition().x.size());
        out << "n " << n << " bipartite\n";
        for (const Edge& e : g.edges()) out << e.u << ' ' << (e.v - n) << ' ' << e.colour << '\n';
    } else {
        out << "n " << g.id_space() << '\n';
        for (const Edge& e : g.edges()) out << e.u << ' ' << e.v << ' ' << e.colour << '\n';
    }
    return out.str();
}

inline EdgeColouredGraph graph_from_text(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("empty graph file");
    std::stringstream hs(header);
    std::string tag, mode;
    int n = 0;
    hs >> tag >> n;
    hs >> mode;
    if (tag != "n" || n <= 0) throw std::runtime_error("bad graph header '" + header + "'");
    bool bipartite = (mode == "bipartite");
    std::vector<Edge> edges;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        int u, v, c;
        if (!(ls >> u >> v >> c)) throw std::runtime_error("bad edge line '" + line + "'");
        if (bipartite) {
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw std::runtime_error("edge index out of range in '" + line + "'");
            edges.emplace_back(u, n + v, c);
        } else {
            if (u < 0 || u >= n || v < 0 || v >= n)
                throw std::runtime_error("edge index out of range in '" + line + "'");
            edges.emplace_back(u, v, c);
        }
    }
    EdgeColouredGraph g = bipartite ? EdgeColouredGraph::bipartite(n, edges)
                                    : EdgeColouredGraph(n, edges);
    g.validate();
    return g;
}

inline EdgeColouredGraph load_graph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return graph_from_text(in);
}

inline void save_graph(const EdgeColouredGraph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << graph_to_text(g);
}

// ---- JSON encodings ----

inline json edge_to_json(const Edge& e) { return json{{"u", e.u}, {"v", e.v}, {"colour", e.colour}}; }

inline json edges_to_json(const std::vector<Edge>& es) {
    json arr = json::array();
    for (const Edge& e : es) arr.push_back(edge_to_json(e));
    return arr;
}

inline json to_json(const RainbowMatching& m) {
    return json{{"kind", "matching"}, {"size", m.size()}, {"edges", edges_to_json(m.edges)}};
}

inline json to_json(const CycleFactor& f) {
    json arr = json::array();
    for (const auto& c : f.cycles) arr.push_back(c);
    return json{{"kind", "cycle_factor"}, {"n_cycles", f.n_cycles()}, {"cycles", arr}};
}

inline json to_json(const RainbowForest& f) {
    return json{{"kind", f.spanning_tree ? "spanning_tree" : "forest"},
                {"size", f.size()},
                {"edges", edges_to_json(f.edges)}};
}

inline json to_json(const VerificationReport& r) {
    return json{{"valid", r.ok()}, {"violations", r.violations}};
}

}  // namespace rainbow
