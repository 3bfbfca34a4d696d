#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rainbow/core.hpp"
#include "rainbow/pseudorandom.hpp"
#include "rainbow/rng.hpp"
#include "rainbow/structures.hpp"

namespace rainbow {

// Parameters of the iterated random edge-assignment. Round-indexed envelope:
// gamma_t = e^{35 alpha t} gamma, delta_t = e^{-alpha t} delta,
// n_t = e^{-alpha t} n, with per-round global bound (1 + gamma_t) delta_t n_t.
struct NibbleConfig {
    double alpha = 0.05;       // activation probability
    double p = 0.1;            // target leftover fraction
    double gamma = 0.0;        // regularity tolerance; 0 -> max(2 alpha, 10 / sqrt(n))
    int ell = 1;               // local bound of the host colouring
    int rounds = 0;            // 0 -> ceil(alpha^-1 ln(1/p))
    bool stop_on_violation = false;
    // The balancing coin flips need a per-round global bound b. The default
    // schedule pegs classes to the decaying envelope
    // (1 + gamma_b) delta_0 n_0 e^{-2 alpha t} with a fixed small gamma_b
    // (the round-indexed e^{35 alpha t} gamma factor is asymptotic
    // bookkeeping that leaves (0,1) immediately at desk scale). Alternative
    // schedules: the survivor's observed global bound, or the literal
    // round-indexed envelope.
    enum class BoundSchedule { FixedEnvelope, Observed, RoundIndexedEnvelope };
    BoundSchedule bound_schedule = BoundSchedule::FixedEnvelope;
    double gamma_b = 0.0;  // 0 -> 2 alpha
    // 0 -> derive from the input graph (part size, mean degree / n).
    double delta = 0.0;
    double n = 0.0;

    int effective_rounds() const {
        if (rounds > 0) return rounds;
        return static_cast<int>(std::ceil(std::log(1.0 / p) / alpha));
    }
};

struct RoundOutcome {
    RainbowMatching matching;
    EdgeColouredGraph survivor;
    double gamma_observed = 0.0;
    double delta_observed = 0.0;
    int bound_observed = 0;
    int clamped_kill_probabilities = 0;
};

struct RoundStats {
    int round = 0;
    int vertices_per_side = 0;
    double target_n = 0.0;
    double target_delta = 0.0;
    double target_gamma = 0.0;
    double delta_observed = 0.0;
    double gamma_observed = 0.0;
    int matching_size = 0;
    int global_bound = 0;
    int largest_colour = 0;
    bool envelope_ok = true;
};

struct NibbleTrajectory {
    std::vector<RoundStats> rounds;
    bool stopped_early = false;
    int envelope_violations = 0;
    // Partition identity |V(G)| = |V(H_T)| + sum |V(M_t)|, checked exactly.
    bool conservation_ok = true;
};

struct NibbleResult {
    RainbowMatching matching;
    EdgeColouredGraph leftover;
    NibbleTrajectory trajectory;
};

// One (alpha, b)-random edge-assignment on a balanced bipartite graph:
// activate X-vertices, let each choose a uniform neighbour, keep the chosen
// edges isolated in endpoint and colour as the round matching M, kill
// surviving edges with the balancing probability
// alpha b / d(x) - alpha |E(c(xy))| / d(x), and restrict to V(G) \ V(M).
inline RoundOutcome edge_assignment_round(const EdgeColouredGraph& g, double alpha, double b,
                                          Rng& rng) {
    if (!g.is_bipartite()) throw std::invalid_argument("bipartite graph required");
    RoundOutcome out;
    const auto& bip = g.bipartition();

    std::vector<Edge> chosen;
    for (int x : bip.x) {
        if (!rng.bernoulli(alpha)) continue;
        const auto& nb = g.neighbours(x);
        if (nb.empty()) continue;  // activated vertex with no surviving neighbour
        auto [y, c] = nb[rng.index(static_cast<int>(nb.size()))];
        chosen.emplace_back(x, y, c);
    }

    std::unordered_map<int, int> chosen_at_y;
    std::unordered_map<int, int> chosen_colour_count;
    for (const Edge& e : chosen) {
        ++chosen_at_y[e.v];
        ++chosen_colour_count[e.colour];
    }
    std::vector<char> in_matching(g.id_space(), 0);
    for (const Edge& e : chosen) {
        if (chosen_at_y[e.v] == 1 && chosen_colour_count[e.colour] == 1) {
            out.matching.edges.push_back(e);
            in_matching[e.u] = in_matching[e.v] = 1;
        }
    }

    std::unordered_map<int, int> class_size;
    for (const auto& [c, cls] : g.colour_classes()) class_size[c] = static_cast<int>(cls.size());

    std::vector<Edge> gamma_edges;
    gamma_edges.reserve(g.n_edges());
    for (const Edge& e : g.edges()) {
        if (chosen_colour_count.count(e.colour)) continue;  // colour chosen
        int x = std::binary_search(bip.x.begin(), bip.x.end(), e.u) ? e.u : e.v;
        double dx = g.degree(x);
        double kill = alpha * b / dx - alpha * class_size[e.colour] / dx;
        if (kill < 0.0 || kill > 1.0) {
            ++out.clamped_kill_probabilities;
            kill = std::clamp(kill, 0.0, 1.0);
        }
        if (!rng.bernoulli(kill)) gamma_edges.push_back(e);
    }

    std::vector<int> remaining;
    remaining.reserve(g.n_vertices());
    for (int v : g.vertices())
        if (!in_matching[v]) remaining.push_back(v);
    std::vector<Edge> h_edges;
    h_edges.reserve(gamma_edges.size());
    for (const Edge& e : gamma_edges)
        if (!in_matching[e.u] && !in_matching[e.v]) h_edges.push_back(e);

    Bipartition nb;
    for (int v : bip.x)
        if (!in_matching[v]) nb.x.push_back(v);
    for (int v : bip.y)
        if (!in_matching[v]) nb.y.push_back(v);
    out.survivor = EdgeColouredGraph(g.id_space(), std::move(h_edges), std::move(nb),
                                     std::move(remaining));

    int side = static_cast<int>(out.survivor.bipartition().x.size());
    if (side > 0) {
        double total = 0;
        int dmin = out.survivor.degree(out.survivor.vertices()[0]);
        int dmax = dmin;
        for (int v : out.survivor.vertices()) {
            int dv = out.survivor.degree(v);
            total += dv;
            dmin = std::min(dmin, dv);
            dmax = std::max(dmax, dv);
        }
        double mean = total / out.survivor.n_vertices();
        out.delta_observed = mean / side;
        out.gamma_observed = mean > 0 ? std::max(dmax - mean, mean - dmin) / mean : 0.0;
    }
    out.bound_observed = out.survivor.global_bound();
    return out;
}

// Iterates the round process T times on shrinking survivors, returning the
// union matching. With stop_on_violation the process halts as soon as a
// survivor leaves the (gamma_t, delta_t, n_t)-regular / bounded envelope;
// otherwise violations are flagged in the trajectory and the process runs on.
inline NibbleResult near_perfect_rainbow_matching(const EdgeColouredGraph& g,
                                                  NibbleConfig config, Rng& rng) {
    if (!g.is_bipartite()) throw std::invalid_argument("bipartite graph required");
    NibbleResult res;
    int side0 = static_cast<int>(g.bipartition().x.size());
    double n0 = config.n > 0 ? config.n : static_cast<double>(side0);
    double delta0 = config.delta;
    if (delta0 <= 0) {
        double total = 0;
        for (int v : g.vertices()) total += g.degree(v);
        delta0 = g.n_vertices() == 0 ? 0.0 : (total / g.n_vertices()) / n0;
    }
    double gamma0 = config.gamma > 0 ? config.gamma
                                     : std::max(2 * config.alpha, 10.0 / std::sqrt(n0));
    int total_rounds = config.effective_rounds();

    EdgeColouredGraph h = g;
    int initial_vertices = g.n_vertices();
    long long matched_vertices = 0;
    for (int t = 0; t < total_rounds; ++t) {
        double gamma_t = std::exp(35.0 * config.alpha * t) * gamma0;
        double delta_t = std::exp(-config.alpha * t) * delta0;
        double n_t = std::exp(-config.alpha * t) * n0;

        RoundStats stats;
        stats.round = t;
        stats.vertices_per_side = static_cast<int>(h.bipartition().x.size());
        stats.target_n = n_t;
        stats.target_delta = delta_t;
        stats.target_gamma = gamma_t;
        auto [regular_ok, rep] = check_regular(h, gamma_t, delta_t, n_t);
        stats.gamma_observed = rep.gamma_achieved;
        stats.delta_observed = rep.delta_estimate;
        auto bounds = boundedness(h);
        stats.largest_colour = bounds.global_bound;
        double b_t = 0;
        switch (config.bound_schedule) {
            case NibbleConfig::BoundSchedule::FixedEnvelope: {
                double gb = config.gamma_b > 0 ? config.gamma_b : 2 * config.alpha;
                b_t = (1.0 + gb) * delta0 * n0 * std::exp(-2.0 * config.alpha * t);
                break;
            }
            case NibbleConfig::BoundSchedule::Observed:
                b_t = static_cast<double>(bounds.global_bound);
                break;
            case NibbleConfig::BoundSchedule::RoundIndexedEnvelope:
                b_t = (1.0 + gamma_t) * delta_t * n_t;
                break;
        }
        bool bounded_ok = bounds.global_bound <= (1.0 + gamma_t) * delta_t * n_t + 1e-9;
        stats.envelope_ok = regular_ok && bounded_ok;
        if (!stats.envelope_ok) {
            ++res.trajectory.envelope_violations;
            if (config.stop_on_violation) {
                res.trajectory.rounds.push_back(stats);
                res.trajectory.stopped_early = true;
                break;
            }
        }

        RoundOutcome round = edge_assignment_round(h, config.alpha, b_t, rng);
        stats.matching_size = round.matching.size();
        stats.global_bound = round.bound_observed;
        res.trajectory.rounds.push_back(stats);
        matched_vertices += 2LL * round.matching.size();
        for (const Edge& e : round.matching.edges) res.matching.edges.push_back(e);
        h = std::move(round.survivor);
    }
    res.trajectory.conservation_ok =
        initial_vertices == h.n_vertices() + static_cast<int>(matched_vertices);
    res.leftover = std::move(h);
    return res;
}

}  // namespace rainbow
