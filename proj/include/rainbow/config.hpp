#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "rainbow/hamilton.hpp"
#include "rainbow/matchings.hpp"
#include "rainbow/nibble.hpp"
#include "rainbow/trees.hpp"

namespace rainbow {

// Every tunable of the pipelines in one place, with documented defaults. The
// asymptotic analysis leaves most of these constants free; the values below
// are desk-scale heuristics, and every one can be overridden from a flat
// key=value config file. The full set is echoed into each report so any run
// can be replayed.
struct PipelineConfig {
    std::uint64_t seed = 1;
    int trials = 1;

    // Nibble.
    double alpha = 0.05;
    double p = 0.1;
    double gamma = 0.0;  // 0: max(2 alpha, 10 / sqrt(n))
    bool stop_on_violation = false;
    std::string bound_schedule = "fixed";  // fixed | observed | round-indexed

    // Matching pipelines.
    double reserve_fraction = 0.05;
    double stop_fraction = 0.08;
    int regularize_period = 10;
    double spread_p = 0.05;
    double share_e = 0.5;
    double share_dx = 0.25;
    double share_dy = 0.25;
    int augment_depth = 4;
    double epsilon = 0.0;  // 0: derive from the colour census
    double companion_fraction = 0.18;

    // Hamilton.
    int k = 5;
    double lambda = 0.1;
    double ham_companion_fraction = 0.22;
    double ham_share_e = 0.16;
    int completion_retries = 4;
    int partition_retries = 4;
    int matching_retries = 6;

    // Trees.
    double gate_gamma = 0.05;
    double tree_eps = 0.1;
    double nu = 0.26;
    int tree_k = 4;
    double tree_companion = 0.02;
    double eta = 0.15;
    double core_eps = 0.12;

    MatchingPipelineConfig matching_config() const {
        MatchingPipelineConfig cfg;
        cfg.alpha = alpha;
        cfg.nibble_p = p;
        cfg.reserve_fraction = reserve_fraction;
        cfg.stop_fraction = stop_fraction;
        cfg.regularize_period = regularize_period;
        cfg.stop_on_bound_violation = stop_on_violation;
        cfg.spread_p = spread_p;
        cfg.share_e = share_e;
        cfg.share_dx = share_dx;
        cfg.share_dy = share_dy;
        cfg.augment_depth = augment_depth;
        return cfg;
    }

    NibbleConfig nibble_config() const {
        NibbleConfig cfg;
        cfg.alpha = alpha;
        cfg.p = p;
        cfg.gamma = gamma;
        cfg.stop_on_violation = stop_on_violation;
        cfg.bound_schedule = bound_schedule == "observed"
                                 ? NibbleConfig::BoundSchedule::Observed
                                 : bound_schedule == "round-indexed"
                                       ? NibbleConfig::BoundSchedule::RoundIndexedEnvelope
                                       : NibbleConfig::BoundSchedule::FixedEnvelope;
        return cfg;
    }

    HamiltonianPipelineConfig hamilton_config() const {
        HamiltonianPipelineConfig cfg;
        cfg.companion_fraction = ham_companion_fraction;
        cfg.share_e = ham_share_e;
        cfg.two_factor.k = k;
        cfg.two_factor.partition_retries = partition_retries;
        cfg.two_factor.matching_retries = matching_retries;
        cfg.two_factor.matching = matching_config();
        cfg.completion.lambda = lambda;
        cfg.completion_retries = completion_retries;
        return cfg;
    }

    TreePipelineConfig tree_config() const {
        TreePipelineConfig cfg;
        cfg.gate_gamma = gate_gamma;
        cfg.eps = tree_eps;
        cfg.nu = nu;
        cfg.eta = eta;
        cfg.core_eps = core_eps;
        cfg.hamilton = hamilton_config();
        cfg.hamilton.two_factor.k = tree_k;
        cfg.hamilton.companion_fraction = tree_companion;
        cfg.hamilton.two_factor.partition_retries = std::max(partition_retries, 12);
        cfg.hamilton.completion_retries = std::max(completion_retries, 8);
        return cfg;
    }

    std::map<std::string, std::string> to_map() const {
        std::map<std::string, std::string> m;
        auto put = [&](const std::string& key, auto value) {
            std::ostringstream ss;
            ss << value;
            m[key] = ss.str();
        };
        put("seed", seed);
        put("trials", trials);
        put("alpha", alpha);
        put("p", p);
        put("gamma", gamma);
        put("stop_on_violation", stop_on_violation ? 1 : 0);
        put("bound_schedule", bound_schedule);
        put("reserve_fraction", reserve_fraction);
        put("stop_fraction", stop_fraction);
        put("regularize_period", regularize_period);
        put("spread_p", spread_p);
        put("share_e", share_e);
        put("share_dx", share_dx);
        put("share_dy", share_dy);
        put("augment_depth", augment_depth);
        put("epsilon", epsilon);
        put("companion_fraction", companion_fraction);
        put("k", k);
        put("lambda", lambda);
        put("ham_companion_fraction", ham_companion_fraction);
        put("ham_share_e", ham_share_e);
        put("completion_retries", completion_retries);
        put("partition_retries", partition_retries);
        put("matching_retries", matching_retries);
        put("gate_gamma", gate_gamma);
        put("tree_eps", tree_eps);
        put("nu", nu);
        put("tree_k", tree_k);
        put("tree_companion", tree_companion);
        put("eta", eta);
        put("core_eps", core_eps);
        return m;
    }

    void set(const std::string& key, const std::string& value) {
        auto as_double = [&] { return std::stod(value); };
        auto as_int = [&] { return std::stoi(value); };
        if (key == "seed")
            seed = std::stoull(value);
        else if (key == "trials")
            trials = as_int();
        else if (key == "alpha")
            alpha = as_double();
        else if (key == "p")
            p = as_double();
        else if (key == "gamma")
            gamma = as_double();
        else if (key == "stop_on_violation")
            stop_on_violation = as_int() != 0;
        else if (key == "bound_schedule")
            bound_schedule = value;
        else if (key == "reserve_fraction")
            reserve_fraction = as_double();
        else if (key == "stop_fraction")
            stop_fraction = as_double();
        else if (key == "regularize_period")
            regularize_period = as_int();
        else if (key == "spread_p")
            spread_p = as_double();
        else if (key == "share_e")
            share_e = as_double();
        else if (key == "share_dx")
            share_dx = as_double();
        else if (key == "share_dy")
            share_dy = as_double();
        else if (key == "augment_depth")
            augment_depth = as_int();
        else if (key == "epsilon")
            epsilon = as_double();
        else if (key == "companion_fraction")
            companion_fraction = as_double();
        else if (key == "k")
            k = as_int();
        else if (key == "lambda")
            lambda = as_double();
        else if (key == "ham_companion_fraction")
            ham_companion_fraction = as_double();
        else if (key == "ham_share_e")
            ham_share_e = as_double();
        else if (key == "completion_retries")
            completion_retries = as_int();
        else if (key == "partition_retries")
            partition_retries = as_int();
        else if (key == "matching_retries")
            matching_retries = as_int();
        else if (key == "gate_gamma")
            gate_gamma = as_double();
        else if (key == "tree_eps")
            tree_eps = as_double();
        else if (key == "nu")
            nu = as_double();
        else if (key == "tree_k")
            tree_k = as_int();
        else if (key == "tree_companion")
            tree_companion = as_double();
        else if (key == "eta")
            eta = as_double();
        else if (key == "core_eps")
            core_eps = as_double();
        else
            throw std::runtime_error("unknown config key '" + key + "'");
    }

    // Flat key=value text, one pair per line, '#' comments.
    void load_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config " + path);
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                auto a = s.find_first_not_of(" \t");
                auto b = s.find_last_not_of(" \t");
                return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
            };
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (!key.empty()) set(key, value);
        }
    }
};

}  // namespace rainbow
