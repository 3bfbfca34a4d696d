#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace rainbow {

struct Edge {
    int u = -1;
    int v = -1;
    int colour = -1;

    Edge() = default;
    Edge(int a, int b, int c) : u(std::min(a, b)), v(std::max(a, b)), colour(c) {}

    bool touches(int w) const { return u == w || v == w; }
    int other(int w) const { return u == w ? v : u; }

    friend bool operator==(const Edge& a, const Edge& b) {
        return a.u == b.u && a.v == b.v && a.colour == b.colour;
    }
    friend bool operator<(const Edge& a, const Edge& b) {
        if (a.u != b.u) return a.u < b.u;
        if (a.v != b.v) return a.v < b.v;
        return a.colour < b.colour;
    }
};

inline std::uint64_t pair_key(int u, int v) {
    if (u > v) std::swap(u, v);
    return (static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}

struct Bipartition {
    std::vector<int> x;  // sorted
    std::vector<int> y;  // sorted
};

// Edge-coloured graph on vertex ids 0..n_vertices-1 with an explicit active
// vertex set (pipelines shrink graphs vertex-wise as well as edge-wise).
// Colours are dense non-negative ints. Parallel edges are rejected.
class EdgeColouredGraph {
public:
    EdgeColouredGraph() = default;

    EdgeColouredGraph(int n_vertices, std::vector<Edge> edges,
                      std::optional<Bipartition> bip = std::nullopt,
                      std::optional<std::vector<int>> vertex_set = std::nullopt)
        : n_ids_(n_vertices), edges_(std::move(edges)), bip_(std::move(bip)) {
        if (vertex_set) {
            vertices_ = std::move(*vertex_set);
            std::sort(vertices_.begin(), vertices_.end());
        } else {
            vertices_.resize(n_ids_);
            for (int i = 0; i < n_ids_; ++i) vertices_[i] = i;
        }
        build_index();
    }

    // n x-vertices get ids 0..n-1, n y-vertices get ids n..2n-1.
    static EdgeColouredGraph bipartite(int n_per_side, const std::vector<Edge>& xy_edges) {
        Bipartition b;
        b.x.resize(n_per_side);
        b.y.resize(n_per_side);
        for (int i = 0; i < n_per_side; ++i) {
            b.x[i] = i;
            b.y[i] = n_per_side + i;
        }
        return EdgeColouredGraph(2 * n_per_side, xy_edges, b);
    }

    int id_space() const { return n_ids_; }
    const std::vector<int>& vertices() const { return vertices_; }
    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    int n_edges() const { return static_cast<int>(edges_.size()); }
    bool is_bipartite() const { return bip_.has_value(); }
    const Bipartition& bipartition() const { return *bip_; }

    bool has_vertex(int v) const { return v >= 0 && v < n_ids_ && in_graph_[v]; }

    bool has_edge(int u, int v) const { return edge_lookup_.count(pair_key(u, v)) > 0; }

    // -1 when absent.
    int colour_of(int u, int v) const {
        auto it = edge_lookup_.find(pair_key(u, v));
        return it == edge_lookup_.end() ? -1 : edges_[it->second].colour;
    }

    int degree(int v) const { return static_cast<int>(adj_[v].size()); }

    int min_degree() const {
        int d = n_vertices() == 0 ? 0 : degree(vertices_[0]);
        for (int v : vertices_) d = std::min(d, degree(v));
        return d;
    }

    int max_degree() const {
        int d = 0;
        for (int v : vertices_) d = std::max(d, degree(v));
        return d;
    }

    // (neighbour, colour) pairs.
    const std::vector<std::pair<int, int>>& neighbours(int v) const { return adj_[v]; }

    int codegree(int u, int v) const {
        int words = static_cast<int>(adj_bits_[u].size());
        int count = 0;
        for (int w = 0; w < words; ++w)
            count += __builtin_popcountll(adj_bits_[u][w] & adj_bits_[v][w]);
        return count;
    }

    bool adjacent(int u, int v) const { return has_edge(u, v); }

    int n_colours() const { return static_cast<int>(colour_classes_.size()); }
    int max_colour_id() const { return max_colour_; }

    const std::vector<std::pair<int, std::vector<Edge>>>& colour_classes() const {
        return colour_classes_;
    }

    int colour_class_size(int colour) const {
        auto it = colour_index_.find(colour);
        return it == colour_index_.end()
                   ? 0
                   : static_cast<int>(colour_classes_[it->second].second.size());
    }

    const std::vector<Edge>* colour_class(int colour) const {
        auto it = colour_index_.find(colour);
        return it == colour_index_.end() ? nullptr : &colour_classes_[it->second].second;
    }

    // Largest colour class size (global boundedness value).
    int global_bound() const {
        int b = 0;
        for (const auto& [c, cls] : colour_classes_) b = std::max(b, static_cast<int>(cls.size()));
        return b;
    }

    // Max number of same-coloured edges at any vertex (local boundedness).
    int local_bound() const {
        int best = 0;
        for (int v : vertices_) {
            std::map<int, int> at_v;
            for (auto [w, c] : adj_[v]) best = std::max(best, ++at_v[c]);
        }
        return best;
    }

    bool properly_coloured() const { return local_bound() <= 1; }

    bool edge_crosses_bipartition(const Edge& e) const {
        bool ux = std::binary_search(bip_->x.begin(), bip_->x.end(), e.u);
        bool vx = std::binary_search(bip_->x.begin(), bip_->x.end(), e.v);
        return ux != vx;
    }

    // Throws on any structural invariant violation.
    void validate() const {
        for (const Edge& e : edges_) {
            if (e.u == e.v) throw std::invalid_argument("loop edge " + std::to_string(e.u));
            if (!has_vertex(e.u) || !has_vertex(e.v))
                throw std::invalid_argument("edge endpoint outside vertex set");
            if (e.colour < 0) throw std::invalid_argument("negative colour id");
        }
        if (bip_) {
            if (bip_->x.size() != bip_->y.size())
                throw std::invalid_argument("bipartition sides differ in size");
            for (const Edge& e : edges_)
                if (!edge_crosses_bipartition(e))
                    throw std::invalid_argument("edge does not cross bipartition");
        }
    }

    EdgeColouredGraph with_edges(std::vector<Edge> new_edges) const {
        return EdgeColouredGraph(n_ids_, std::move(new_edges), bip_, vertices_);
    }

    EdgeColouredGraph without_edges(const std::vector<Edge>& removed) const {
        std::unordered_set<std::uint64_t> gone;
        gone.reserve(removed.size() * 2);
        for (const Edge& e : removed) gone.insert(pair_key(e.u, e.v));
        std::vector<Edge> kept;
        kept.reserve(edges_.size());
        for (const Edge& e : edges_)
            if (!gone.count(pair_key(e.u, e.v))) kept.push_back(e);
        return with_edges(std::move(kept));
    }

    EdgeColouredGraph restricted_to_colours(const std::unordered_set<int>& colours,
                                            bool keep_listed) const {
        std::vector<Edge> kept;
        for (const Edge& e : edges_)
            if (colours.count(e.colour) == static_cast<std::size_t>(keep_listed ? 1 : 0))
                kept.push_back(e);
        return with_edges(std::move(kept));
    }

    // Induced subgraph on a vertex subset; bipartition is restricted when present.
    EdgeColouredGraph induced(const std::vector<int>& subset) const {
        std::vector<char> keep(n_ids_, 0);
        for (int v : subset) keep[v] = 1;
        std::vector<Edge> kept;
        for (const Edge& e : edges_)
            if (keep[e.u] && keep[e.v]) kept.push_back(e);
        std::optional<Bipartition> nb;
        if (bip_) {
            Bipartition b;
            for (int v : bip_->x)
                if (keep[v]) b.x.push_back(v);
            for (int v : bip_->y)
                if (keep[v]) b.y.push_back(v);
            nb = std::move(b);
        }
        std::vector<int> verts(subset);
        std::sort(verts.begin(), verts.end());
        return EdgeColouredGraph(n_ids_, std::move(kept), std::move(nb), std::move(verts));
    }

    // Bipartite-style subgraph: edges between two disjoint vertex sets.
    EdgeColouredGraph between(const std::vector<int>& a, const std::vector<int>& b) const {
        std::vector<char> in_a(n_ids_, 0), in_b(n_ids_, 0);
        for (int v : a) in_a[v] = 1;
        for (int v : b) in_b[v] = 1;
        std::vector<Edge> kept;
        for (const Edge& e : edges_) {
            if ((in_a[e.u] && in_b[e.v]) || (in_a[e.v] && in_b[e.u])) kept.push_back(e);
        }
        Bipartition bi;
        bi.x = a;
        bi.y = b;
        std::sort(bi.x.begin(), bi.x.end());
        std::sort(bi.y.begin(), bi.y.end());
        std::vector<int> verts = bi.x;
        verts.insert(verts.end(), bi.y.begin(), bi.y.end());
        std::sort(verts.begin(), verts.end());
        return EdgeColouredGraph(n_ids_, std::move(kept), std::move(bi), std::move(verts));
    }

private:
    void build_index() {
        in_graph_.assign(n_ids_, 0);
        for (int v : vertices_) {
            if (v < 0 || v >= n_ids_) throw std::invalid_argument("vertex id out of range");
            in_graph_[v] = 1;
        }
        adj_.assign(n_ids_, {});
        edge_lookup_.clear();
        edge_lookup_.reserve(edges_.size() * 2);
        max_colour_ = -1;
        std::map<int, std::vector<Edge>> classes;
        int word_count = (n_ids_ + 63) / 64;
        adj_bits_.assign(n_ids_, std::vector<std::uint64_t>(word_count, 0));
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            Edge& e = edges_[i];
            if (e.u > e.v) std::swap(e.u, e.v);
            auto [it, fresh] = edge_lookup_.emplace(pair_key(e.u, e.v), i);
            if (!fresh)
                throw std::invalid_argument("parallel edge " + std::to_string(e.u) + "-" +
                                            std::to_string(e.v));
            adj_[e.u].push_back({e.v, e.colour});
            adj_[e.v].push_back({e.u, e.colour});
            adj_bits_[e.u][e.v >> 6] |= 1ULL << (e.v & 63);
            adj_bits_[e.v][e.u >> 6] |= 1ULL << (e.u & 63);
            max_colour_ = std::max(max_colour_, e.colour);
            classes[e.colour].push_back(e);
        }
        colour_classes_.assign(classes.begin(), classes.end());
        colour_index_.clear();
        for (std::size_t i = 0; i < colour_classes_.size(); ++i)
            colour_index_[colour_classes_[i].first] = i;
    }

    int n_ids_ = 0;
    std::vector<Edge> edges_;
    std::optional<Bipartition> bip_;
    std::vector<int> vertices_;
    std::vector<char> in_graph_;
    std::vector<std::vector<std::pair<int, int>>> adj_;
    std::vector<std::vector<std::uint64_t>> adj_bits_;
    std::unordered_map<std::uint64_t, std::size_t> edge_lookup_;
    std::vector<std::pair<int, std::vector<Edge>>> colour_classes_;
    std::unordered_map<int, std::size_t> colour_index_;
    int max_colour_ = -1;
};

struct Arc {
    int tail = -1;
    int head = -1;
    int colour = -1;
};

// Orientation of an edge-coloured graph. Only out-neighbourhoods matter to
// the completion rotations, so that is all we index.
class Digraph {
public:
    Digraph() = default;
    Digraph(int id_space, std::vector<Arc> arcs) : n_ids_(id_space), arcs_(std::move(arcs)) {
        out_.assign(n_ids_, {});
        for (const Arc& a : arcs_) out_[a.tail].push_back({a.head, a.colour});
    }

    int id_space() const { return n_ids_; }
    const std::vector<Arc>& arcs() const { return arcs_; }
    const std::vector<std::pair<int, int>>& out_neighbours(int v) const { return out_[v]; }
    int out_degree(int v) const { return static_cast<int>(out_[v].size()); }

    int min_out_degree(const std::vector<int>& over) const {
        if (over.empty()) return 0;
        int d = out_degree(over[0]);
        for (int v : over) d = std::min(d, out_degree(v));
        return d;
    }

    Digraph without_colours(const std::unordered_set<int>& colours) const {
        std::vector<Arc> kept;
        for (const Arc& a : arcs_)
            if (!colours.count(a.colour)) kept.push_back(a);
        return Digraph(n_ids_, std::move(kept));
    }

private:
    int n_ids_ = 0;
    std::vector<Arc> arcs_;
    std::vector<std::vector<std::pair<int, int>>> out_;
};

// Complete graph on n vertices, colour ids unset (-1 is invalid, so callers
// must colour it); kept internal to generators and tests via colour_fn.
template <typename ColourFn>
EdgeColouredGraph complete_graph(int n, ColourFn colour_of) {
    std::vector<Edge> es;
    es.reserve(n * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) es.emplace_back(i, j, colour_of(i, j));
    return EdgeColouredGraph(n, std::move(es));
}

template <typename ColourFn>
EdgeColouredGraph complete_bipartite(int n, ColourFn colour_of) {
    std::vector<Edge> es;
    es.reserve(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) es.emplace_back(i, n + j, colour_of(i, j));
    return EdgeColouredGraph::bipartite(n, es);
}

}  // namespace rainbow
