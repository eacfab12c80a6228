#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embedding_store.hpp"
#include "manifest.hpp"

namespace tg {

// Ground-truth generator: a Markov chain over latent states with one unit
// emission direction per state. The downstream transition graph models exactly
// first-order transitions, so the chain is an analytically known target.
struct SyntheticSpec {
    uint32_t num_states = 0;
    uint32_t dim = 0;
    std::vector<double> transition; // num_states x num_states, row-stochastic
    std::vector<double> directions; // num_states x dim, unit Euclidean norm rows
    double noise_scale = 0.0;
    uint64_t seed = 0;
};

struct SyntheticBatch {
    EmbeddingStore store;
    SequenceManifest manifest;
    std::vector<std::vector<uint32_t>> true_states; // aligned with manifest.entries
};

// Row sums within 1e-9 of 1, direction norms within 1e-9 of 1.
void validate_spec(const SyntheticSpec &spec);

// Samples num_sequences chains of seq_len tokens each: uniform initial state,
// next state by the transition row, embedding = direction[state] + gaussian
// noise of scale noise_scale. Pure function of its arguments.
SyntheticBatch generate_synthetic(const SyntheticSpec &spec, uint64_t num_sequences,
                                  uint64_t seq_len, const std::string &id_prefix = "seq",
                                  Dataset dataset = Dataset::Reference,
                                  std::optional<Label> label = std::nullopt);

// States drawn i.i.d. uniform instead of from the chain; same emission model.
SyntheticBatch generate_uniform_random(const SyntheticSpec &spec, uint64_t num_sequences,
                                       uint64_t seq_len, const std::string &id_prefix,
                                       Dataset dataset, std::optional<Label> label);

// Chain sampling, but with probability stutter_prob each step repeats the
// previous state instead of advancing. Produces the repetitive texture used
// for the "incorrect" group.
SyntheticBatch generate_stuttered(const SyntheticSpec &spec, uint64_t num_sequences,
                                  uint64_t seq_len, double stutter_prob,
                                  const std::string &id_prefix, Dataset dataset,
                                  std::optional<Label> label);

// Concatenates batches into one store/manifest; ids must stay unique.
SyntheticBatch merge_batches(std::vector<SyntheticBatch> batches);

// Benchmark chain: states 0..2 form a dominant 3-cycle (weight dominant_p),
// every other state routes toward it. Greedy walks collapse onto the cycle
// while exploration spreads over all states, which gives the reward/entropy
// trade-off a wide, noise-proof margin. Directions are seeded random unit
// vectors.
SyntheticSpec make_benchmark_spec(uint32_t num_states, uint32_t dim, double noise_scale,
                                  double dominant_p, uint64_t seed);

// True-state sidecar: one {"id":..., "states":[...]} object per line.
void write_true_states(const SyntheticBatch &batch, const std::string &path);
std::vector<std::pair<std::string, std::vector<uint32_t>>>
read_true_states(const std::string &path);

} // namespace tg
