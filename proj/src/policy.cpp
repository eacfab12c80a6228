#include "policy.hpp"

#include <bit>
#include <cmath>

#include "error.hpp"
#include "metrics.hpp"

namespace tg {

std::optional<uint32_t> step(const ClusterGraph &graph, uint32_t current, double temperature,
                             Rng &rng) {
    if (temperature < 0.0) fail(TG_ERR_INVALID_ARGUMENT, "step: temperature must be >= 0");
    const auto out = graph.successors(current);
    if (out.empty()) return std::nullopt;
    if (temperature == 0.0) {
        // Greedy argmax; the scan is in ascending dst order, so a strict
        // comparison keeps the lowest id on ties.
        uint32_t best = out.front().first;
        uint64_t best_weight = out.front().second;
        for (const auto &[dst, weight] : out) {
            if (weight > best_weight) {
                best = dst;
                best_weight = weight;
            }
        }
        return best;
    }
    // weight^(1/tau) in log space; counts can be large and 1/tau can blow
    // a direct pow() past double range.
    const double inv_tau = 1.0 / temperature;
    std::vector<double> log_weights(out.size());
    double max_log = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < out.size(); ++i) {
        log_weights[i] = inv_tau * std::log(static_cast<double>(out[i].second));
        max_log = std::max(max_log, log_weights[i]);
    }
    std::vector<double> weights(out.size());
    for (size_t i = 0; i < out.size(); ++i) weights[i] = std::exp(log_weights[i] - max_log);
    return out[rng.discrete(weights)].first;
}

namespace {

uint32_t pick_start(const ClusterGraph &graph, const PolicyConfig &config, Rng &rng) {
    if (config.start_cluster != kStartByOutdegree) {
        if (config.start_cluster >= graph.num_clusters())
            fail(TG_ERR_OUT_OF_RANGE,
                 "rollout: start cluster " + std::to_string(config.start_cluster) +
                     " outside K = " + std::to_string(graph.num_clusters()));
        return config.start_cluster;
    }
    std::vector<double> out_weight(graph.num_clusters(), 0.0);
    for (uint32_t c = 0; c < graph.num_clusters(); ++c)
        for (const auto &[dst, weight] : graph.successors(c))
            out_weight[c] += static_cast<double>(weight);
    return static_cast<uint32_t>(rng.discrete(out_weight));
}

} // namespace

TrajectoryReport rollout(const ClusterGraph &graph, const PolicyConfig &config) {
    if (graph.total_transitions() == 0) fail(TG_ERR_INVALID_ARGUMENT, "rollout: empty graph");
    if (config.max_len == 0) fail(TG_ERR_INVALID_ARGUMENT, "rollout: max_len must be >= 1");
    if (config.num_trajectories == 0)
        fail(TG_ERR_INVALID_ARGUMENT, "rollout: num_trajectories must be >= 1");

    TrajectoryReport report;
    report.trajectories.reserve(config.num_trajectories);
    double reward_sum = 0.0;
    double per_token_sum = 0.0;
    for (uint32_t t = 0; t < config.num_trajectories; ++t) {
        Rng rng(derive_seed(config.seed, "trajectory", t));
        AssignedSequence trajectory;
        trajectory.id = "traj-" + std::to_string(t);
        trajectory.clusters.push_back(pick_start(graph, config, rng));
        while (trajectory.clusters.size() < config.max_len) {
            const auto next = step(graph, trajectory.clusters.back(), config.temperature, rng);
            if (!next) break;
            trajectory.clusters.push_back(*next);
        }
        reward_sum += static_cast<double>(reward(graph, trajectory));
        per_token_sum += per_token_reward(graph, trajectory);
        report.trajectories.push_back(std::move(trajectory));
    }
    report.mean_reward = reward_sum / config.num_trajectories;
    report.mean_per_token_reward = per_token_sum / config.num_trajectories;
    report.cluster_entropy = cluster_entropy(report.trajectories);
    return report;
}

std::vector<SweepRow> sweep(const ClusterGraph &graph, std::span<const double> temperatures,
                            const PolicyConfig &base_config) {
    if (temperatures.empty()) fail(TG_ERR_INVALID_ARGUMENT, "sweep: no temperatures");
    std::vector<SweepRow> rows;
    rows.reserve(temperatures.size());
    for (double tau : temperatures) {
        PolicyConfig config = base_config;
        config.temperature = tau;
        // Seed derived from the temperature value: duplicate taus give
        // identical rows.
        config.seed = derive_seed(base_config.seed, "sweep-tau", std::bit_cast<uint64_t>(tau));
        const TrajectoryReport report = rollout(graph, config);
        rows.push_back({tau, report.mean_reward, report.mean_per_token_reward,
                        report.cluster_entropy});
    }
    return rows;
}

} // namespace tg
