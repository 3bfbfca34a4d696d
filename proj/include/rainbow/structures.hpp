#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rainbow/core.hpp"

namespace rainbow {

struct RainbowMatching {
    std::vector<Edge> edges;

    int size() const { return static_cast<int>(edges.size()); }

    std::vector<int> covered_vertices() const {
        std::vector<int> vs;
        vs.reserve(edges.size() * 2);
        for (const Edge& e : edges) {
            vs.push_back(e.u);
            vs.push_back(e.v);
        }
        std::sort(vs.begin(), vs.end());
        return vs;
    }

    bool covers(int v) const {
        for (const Edge& e : edges)
            if (e.touches(v)) return true;
        return false;
    }

    std::unordered_set<int> colours() const {
        std::unordered_set<int> cs;
        for (const Edge& e : edges) cs.insert(e.colour);
        return cs;
    }
};

struct CycleFactor {
    // Each cycle is a vertex sequence v0 v1 ... v_{k-1} (closing edge implied).
    std::vector<std::vector<int>> cycles;

    int n_cycles() const { return static_cast<int>(cycles.size()); }

    std::vector<Edge> edge_list(const EdgeColouredGraph& host) const {
        std::vector<Edge> es;
        for (const auto& cyc : cycles) {
            int k = static_cast<int>(cyc.size());
            for (int i = 0; i < k; ++i) {
                int u = cyc[i], v = cyc[(i + 1) % k];
                es.emplace_back(u, v, host.colour_of(u, v));
            }
        }
        return es;
    }
};

struct RainbowForest {
    std::vector<Edge> edges;
    bool spanning_tree = false;  // when set, verification also demands connected + spanning

    int size() const { return static_cast<int>(edges.size()); }
};

enum class StructureKind { Matching, TwoFactor, HamiltonianCycle, Forest, SpanningTree };

struct VerificationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
    void flag(std::string v) { violations.push_back(std::move(v)); }

    std::string summary() const {
        if (ok()) return "valid";
        std::string s;
        for (const auto& v : violations) {
            if (!s.empty()) s += "; ";
            s += v;
        }
        return s;
    }
};

namespace detail {

inline void check_edges_in_host(const std::vector<Edge>& edges, const EdgeColouredGraph& host,
                                VerificationReport& report) {
    for (const Edge& e : edges) {
        if (!host.has_edge(e.u, e.v)) {
            report.flag("foreign edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
        } else if (host.colour_of(e.u, e.v) != e.colour) {
            report.flag("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                        " colour mismatch with host");
        }
    }
}

inline void check_rainbow(const std::vector<Edge>& edges, VerificationReport& report) {
    std::unordered_map<int, int> count;
    for (const Edge& e : edges) {
        if (++count[e.colour] == 2)
            report.flag("repeated colour " + std::to_string(e.colour));
    }
}

inline void check_vertex_disjoint(const std::vector<Edge>& edges, VerificationReport& report) {
    std::unordered_map<int, int> deg;
    for (const Edge& e : edges) {
        if (++deg[e.u] == 2) report.flag("shared vertex " + std::to_string(e.u));
        if (++deg[e.v] == 2) report.flag("shared vertex " + std::to_string(e.v));
    }
}

// Union-find acyclicity / connectivity helper.
struct Dsu {
    std::vector<int> parent;
    explicit Dsu(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[a] = b;
        return true;
    }
};

}  // namespace detail

inline VerificationReport verify_matching(const RainbowMatching& m,
                                          const EdgeColouredGraph& host) {
    VerificationReport report;
    detail::check_edges_in_host(m.edges, host, report);
    detail::check_vertex_disjoint(m.edges, report);
    detail::check_rainbow(m.edges, report);
    return report;
}

inline VerificationReport verify_perfect_matching(const RainbowMatching& m,
                                                  const EdgeColouredGraph& host) {
    VerificationReport report = verify_matching(m, host);
    if (2 * m.size() != host.n_vertices())
        report.flag("not perfect: covers " + std::to_string(2 * m.size()) + " of " +
                    std::to_string(host.n_vertices()) + " vertices");
    return report;
}

inline VerificationReport verify_cycle_factor(const CycleFactor& f, const EdgeColouredGraph& host,
                                              bool rainbow_required = true,
                                              int min_cycle_length = 3) {
    VerificationReport report;
    std::unordered_set<int> seen;
    for (const auto& cyc : f.cycles) {
        if (static_cast<int>(cyc.size()) < min_cycle_length)
            report.flag("short cycle of length " + std::to_string(cyc.size()));
        for (int v : cyc) {
            if (!host.has_vertex(v)) report.flag("cycle vertex outside host");
            if (!seen.insert(v).second)
                report.flag("shared vertex " + std::to_string(v));
        }
    }
    for (int v : host.vertices())
        if (!seen.count(v)) {
            report.flag("not spanning: vertex " + std::to_string(v) + " uncovered");
            break;
        }
    auto edges = f.edge_list(host);
    detail::check_edges_in_host(edges, host, report);
    if (rainbow_required) detail::check_rainbow(edges, report);
    return report;
}

inline VerificationReport verify_hamiltonian_cycle(const CycleFactor& f,
                                                   const EdgeColouredGraph& host) {
    VerificationReport report = verify_cycle_factor(f, host);
    if (f.n_cycles() != 1) report.flag("disconnected: " + std::to_string(f.n_cycles()) + " cycles");
    return report;
}

inline VerificationReport verify_forest(const RainbowForest& f, const EdgeColouredGraph& host) {
    VerificationReport report;
    detail::check_edges_in_host(f.edges, host, report);
    detail::check_rainbow(f.edges, report);
    detail::Dsu dsu(host.id_space());
    for (const Edge& e : f.edges)
        if (!dsu.unite(e.u, e.v)) {
            report.flag("cycle through edge " + std::to_string(e.u) + "-" + std::to_string(e.v));
            break;
        }
    if (f.spanning_tree) {
        if (f.size() != host.n_vertices() - 1)
            report.flag("not spanning tree: " + std::to_string(f.size()) + " edges on " +
                        std::to_string(host.n_vertices()) + " vertices");
        else {
            int root = dsu.find(host.vertices()[0]);
            for (int v : host.vertices())
                if (dsu.find(v) != root) {
                    report.flag("disconnected at vertex " + std::to_string(v));
                    break;
                }
        }
    }
    return report;
}

inline VerificationReport verify(const RainbowMatching& m, const EdgeColouredGraph& host,
                                 StructureKind kind = StructureKind::Matching) {
    return kind == StructureKind::Matching ? verify_matching(m, host)
                                           : verify_perfect_matching(m, host);
}

inline VerificationReport verify(const CycleFactor& f, const EdgeColouredGraph& host,
                                 StructureKind kind = StructureKind::TwoFactor) {
    return kind == StructureKind::HamiltonianCycle ? verify_hamiltonian_cycle(f, host)
                                                   : verify_cycle_factor(f, host);
}

inline VerificationReport verify(const RainbowForest& f, const EdgeColouredGraph& host,
                                 StructureKind = StructureKind::Forest) {
    return verify_forest(f, host);
}

// Reports any edge (as an unordered pair) used by two structures in a family.
inline VerificationReport verify_pairwise_disjoint(
    const std::vector<std::vector<Edge>>& families) {
    VerificationReport report;
    std::unordered_map<std::uint64_t, int> owner;
    for (std::size_t i = 0; i < families.size(); ++i) {
        for (const Edge& e : families[i]) {
            auto [it, fresh] = owner.emplace(pair_key(e.u, e.v), static_cast<int>(i));
            if (!fresh)
                report.flag("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                            " in structures " + std::to_string(it->second) + " and " +
                            std::to_string(i));
        }
    }
    return report;
}

inline std::vector<std::vector<Edge>> edge_lists(const std::vector<RainbowMatching>& ms) {
    std::vector<std::vector<Edge>> out;
    out.reserve(ms.size());
    for (const auto& m : ms) out.push_back(m.edges);
    return out;
}

// Dummy colours occupy ids >= threshold; emitted structures must not contain them.
inline RainbowMatching strip_dummy_edges(const RainbowMatching& m, int dummy_threshold) {
    RainbowMatching out;
    for (const Edge& e : m.edges)
        if (e.colour < dummy_threshold) out.edges.push_back(e);
    return out;
}

}  // namespace rainbow
