#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace tg {

// sample-by-outdegree start: pick a start cluster with probability
// proportional to its total outgoing weight.
inline constexpr uint32_t kStartByOutdegree = UINT32_MAX;

struct PolicyConfig {
    double temperature = 1.0;            // 0 = pure exploit (greedy argmax)
    uint32_t max_len = 64;               // trajectory length bound, >= 1
    uint32_t start_cluster = kStartByOutdegree;
    uint64_t seed = 0;
    uint32_t num_trajectories = 100;
};

struct TrajectoryReport {
    std::vector<AssignedSequence> trajectories;
    double mean_reward = 0.0;
    double mean_per_token_reward = 0.0;
    double cluster_entropy = 0.0; // pooled over all trajectory tokens
};

struct SweepRow {
    double temperature = 0.0;
    double mean_reward = 0.0;
    double mean_per_token_reward = 0.0;
    double cluster_entropy = 0.0;
};

// One transition: halt (nullopt) when `current` has no outgoing edges;
// greedy argmax at temperature 0 (ties to the lower id); otherwise a
// Boltzmann draw with probability proportional to weight^(1/temperature).
std::optional<uint32_t> step(const ClusterGraph &graph, uint32_t current, double temperature,
                             Rng &rng);

// num_trajectories walks via step until halt or max_len; deterministic given
// the config seed (each trajectory derives its own stream).
TrajectoryReport rollout(const ClusterGraph &graph, const PolicyConfig &config);

// One rollout per temperature with a per-temperature derived seed, so
// duplicate temperatures reproduce identical rows.
std::vector<SweepRow> sweep(const ClusterGraph &graph, std::span<const double> temperatures,
                            const PolicyConfig &base_config);

} // namespace tg
