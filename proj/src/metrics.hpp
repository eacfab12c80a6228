#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cluster.hpp"
#include "manifest.hpp"
#include "sparse_vector.hpp"

namespace tg {

// Fixed-bin histogram over [-1, 1] for consecutive-token cosine similarities.
struct Histogram {
    std::vector<double> bin_edges;  // strictly increasing, first -1, last 1
    std::vector<uint64_t> counts;   // bin_edges.size() - 1 entries
    double epsilon = 1e-10;         // smoothing added per bin before KL

    static Histogram uniform(size_t bins, double epsilon = 1e-10);

    void add(double value);
    uint64_t total() const;
    // (count + epsilon) / (total + bins * epsilon)
    std::vector<double> smoothed_probabilities() const;
};

// Shannon entropy (natural log) of the pooled cluster-frequency distribution.
double cluster_entropy(std::span<const AssignedSequence> assigned);

enum class DtwCost { Cosine, Euclidean };

// Classic DTW dynamic program: per-step cost between elements, moves
// {match, insert, delete}, no warping window; returns the accumulated cost
// of the optimal path.
double dtw_distance(std::span<const SparseVector> a, std::span<const SparseVector> b,
                    DtwCost cost = DtwCost::Cosine);

// Min over (optionally seeded-subsampled) originals of dtw_distance.
double min_dtw_to_set(std::span<const SparseVector> sequence,
                      std::span<const std::vector<SparseVector>> originals,
                      std::optional<uint64_t> subsample, uint64_t seed,
                      DtwCost cost = DtwCost::Cosine);

// Pools the cosine similarity of consecutive token pairs within each sequence
// into the shared [-1, 1] histogram. Raw SAE variant.
Histogram consecutive_similarity_distribution(std::span<const std::vector<SparseVector>> sequences,
                                              size_t bins = 100, double epsilon = 1e-10);

// Centroid variant: each token is represented by its assigned centroid.
Histogram consecutive_similarity_distribution(std::span<const AssignedSequence> assigned,
                                              const ClusterModel &model, size_t bins = 100,
                                              double epsilon = 1e-10);

// KL(P || Q) over smoothed, renormalized bin probabilities. Bin edges must
// match exactly.
double kl_divergence(const Histogram &p, const Histogram &q);

struct LengthStats {
    std::optional<double> original;
    std::optional<double> correct;
    std::optional<double> incorrect;
};

// Mean token length per group: original = reference-tagged entries, the other
// two follow the labels. Absent groups stay empty.
LengthStats length_stats(const SequenceManifest &manifest);

// A metric value or the reason it could not be computed.
struct MetricValue {
    std::optional<double> value;
    std::string note; // set when absent, e.g. "no sequences labeled incorrect"

    static MetricValue of(double v) { return {v, {}}; }
    static MetricValue absent(std::string reason) { return {std::nullopt, std::move(reason)}; }
};

struct KlTriple {
    MetricValue corr_orig;
    MetricValue incorr_orig;
    MetricValue corr_incorr;
};

struct MetricReport {
    MetricValue entropy_original, entropy_correct, entropy_incorrect;
    MetricValue dtw_correct, dtw_incorrect;
    KlTriple kl_sae;
    KlTriple kl_centroid;
    MetricValue length_original, length_correct, length_incorrect;
    // Pooled similarity histograms per group, SAE-based and centroid-based.
    std::optional<Histogram> hist_sae_original, hist_sae_correct, hist_sae_incorrect;
    std::optional<Histogram> hist_centroid_original, hist_centroid_correct,
        hist_centroid_incorrect;
};

struct MetricParams {
    size_t bins = 100;
    double epsilon = 1e-10;
    std::optional<uint64_t> dtw_subsample = 64;
    uint64_t seed = 0;
    DtwCost dtw_cost = DtwCost::Cosine;
};

// Assembles every metric over the three groups (original = reference-tagged,
// correct/incorrect by label). Missing groups are reported per metric; the
// rest still compute.
MetricReport full_report(std::span<const AssignedSequence> assigned,
                         std::span<const std::vector<SparseVector>> sparse_sequences,
                         const ClusterModel &model, const SequenceManifest &manifest,
                         const MetricParams &params);

// Plain-text rendering: one section per metric family, one value per line.
std::string render_report(const MetricReport &report);

// Tab-separated `bin_left bin_right count` rows.
void write_histogram_tsv(const Histogram &histogram, const std::string &path);

} // namespace tg
