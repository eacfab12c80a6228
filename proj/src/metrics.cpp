#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "error.hpp"
#include "rng.hpp"

namespace tg {

Histogram Histogram::uniform(size_t bins, double epsilon) {
    if (bins == 0) fail(TG_ERR_INVALID_ARGUMENT, "histogram: need at least one bin");
    if (!(epsilon > 0.0)) fail(TG_ERR_INVALID_ARGUMENT, "histogram: epsilon must be > 0");
    Histogram histogram;
    histogram.epsilon = epsilon;
    histogram.bin_edges.resize(bins + 1);
    for (size_t i = 0; i <= bins; ++i)
        histogram.bin_edges[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(bins);
    histogram.bin_edges.front() = -1.0;
    histogram.bin_edges.back() = 1.0;
    histogram.counts.assign(bins, 0);
    return histogram;
}

void Histogram::add(double value) {
    // Cosine similarities live in [-1, 1]; clamp fp spill into the end bins.
    const auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), value);
    const ptrdiff_t raw = it - bin_edges.begin() - 1;
    const size_t bin = static_cast<size_t>(
        std::clamp<ptrdiff_t>(raw, 0, static_cast<ptrdiff_t>(counts.size()) - 1));
    counts[bin] += 1;
}

uint64_t Histogram::total() const {
    uint64_t total = 0;
    for (uint64_t c : counts) total += c;
    return total;
}

std::vector<double> Histogram::smoothed_probabilities() const {
    const double denom =
        static_cast<double>(total()) + epsilon * static_cast<double>(counts.size());
    std::vector<double> probabilities(counts.size());
    for (size_t b = 0; b < counts.size(); ++b)
        probabilities[b] = (static_cast<double>(counts[b]) + epsilon) / denom;
    return probabilities;
}

double cluster_entropy(std::span<const AssignedSequence> assigned) {
    uint64_t total = 0;
    uint32_t max_cluster = 0;
    for (const auto &sequence : assigned) {
        total += sequence.clusters.size();
        for (uint32_t c : sequence.clusters) max_cluster = std::max(max_cluster, c);
    }
    if (total == 0) fail(TG_ERR_INVALID_ARGUMENT, "cluster_entropy: no tokens");

    std::vector<uint64_t> counts(static_cast<size_t>(max_cluster) + 1, 0);
    for (const auto &sequence : assigned)
        for (uint32_t c : sequence.clusters) counts[c] += 1;

    double entropy = 0.0;
    for (uint64_t count : counts) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / static_cast<double>(total);
        entropy -= p * std::log(p);
    }
    return std::max(entropy, 0.0);
}

namespace {

double pair_cost(const SparseVector &a, double a_norm, const SparseVector &b, double b_norm,
                 DtwCost cost) {
    if (cost == DtwCost::Cosine) {
        const double norms = a_norm * b_norm;
        if (norms < 1e-300) return 1.0;
        return 1.0 - dot(a, b) / norms;
    }
    const double sq = std::max(0.0, a_norm * a_norm + b_norm * b_norm - 2.0 * dot(a, b));
    return std::sqrt(sq);
}

} // namespace

double dtw_distance(std::span<const SparseVector> a, std::span<const SparseVector> b,
                    DtwCost cost) {
    if (a.empty() || b.empty()) fail(TG_ERR_INVALID_ARGUMENT, "dtw_distance: empty sequence");
    std::vector<double> a_norms(a.size()), b_norms(b.size());
    for (size_t i = 0; i < a.size(); ++i) a_norms[i] = a[i].norm();
    for (size_t j = 0; j < b.size(); ++j) b_norms[j] = b[j].norm();

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(b.size() + 1, inf), curr(b.size() + 1, inf);
    prev[0] = 0.0; // virtual (-1,-1) corner
    for (size_t i = 0; i < a.size(); ++i) {
        curr[0] = inf;
        for (size_t j = 0; j < b.size(); ++j) {
            const double c = pair_cost(a[i], a_norms[i], b[j], b_norms[j], cost);
            const double best = std::min({prev[j], prev[j + 1], curr[j]});
            curr[j + 1] = c + best;
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

double min_dtw_to_set(std::span<const SparseVector> sequence,
                      std::span<const std::vector<SparseVector>> originals,
                      std::optional<uint64_t> subsample, uint64_t seed, DtwCost cost) {
    if (originals.empty()) fail(TG_ERR_INVALID_ARGUMENT, "min_dtw_to_set: empty original set");
    std::vector<uint64_t> picks;
    if (subsample && *subsample < originals.size()) {
        if (*subsample == 0)
            fail(TG_ERR_INVALID_ARGUMENT, "min_dtw_to_set: subsample must be >= 1");
        Rng rng(derive_seed(seed, "dtw-subsample"));
        picks = rng.sample_indices(originals.size(), *subsample);
        std::sort(picks.begin(), picks.end());
    } else {
        picks.resize(originals.size());
        for (uint64_t i = 0; i < originals.size(); ++i) picks[i] = i;
    }
    double best = std::numeric_limits<double>::infinity();
    for (uint64_t i : picks) best = std::min(best, dtw_distance(sequence, originals[i], cost));
    return best;
}

Histogram consecutive_similarity_distribution(std::span<const std::vector<SparseVector>> sequences,
                                              size_t bins, double epsilon) {
    Histogram histogram = Histogram::uniform(bins, epsilon);
    for (const auto &sequence : sequences) {
        for (size_t t = 0; t + 1 < sequence.size(); ++t) {
            const double distance = cosine_distance(sequence[t], sequence[t + 1]);
            histogram.add(1.0 - distance);
        }
    }
    if (histogram.total() == 0)
        fail(TG_ERR_INVALID_ARGUMENT,
             "consecutive_similarity_distribution: no consecutive pairs available");
    return histogram;
}

Histogram consecutive_similarity_distribution(std::span<const AssignedSequence> assigned,
                                              const ClusterModel &model, size_t bins,
                                              double epsilon) {
    Histogram histogram = Histogram::uniform(bins, epsilon);
    for (const auto &sequence : assigned) {
        for (size_t t = 0; t + 1 < sequence.clusters.size(); ++t) {
            const uint32_t a = sequence.clusters[t];
            const uint32_t b = sequence.clusters[t + 1];
            if (a >= model.num_clusters || b >= model.num_clusters)
                fail(TG_ERR_OUT_OF_RANGE, "similarity distribution: cluster id outside K");
            const double distance = cosine_distance(model.centroid(a), model.centroid(b));
            histogram.add(1.0 - distance);
        }
    }
    if (histogram.total() == 0)
        fail(TG_ERR_INVALID_ARGUMENT,
             "consecutive_similarity_distribution: no consecutive pairs available");
    return histogram;
}

double kl_divergence(const Histogram &p, const Histogram &q) {
    if (p.bin_edges != q.bin_edges)
        fail(TG_ERR_INVALID_ARGUMENT, "kl_divergence: histograms have different bin edges");
    const auto p_probs = p.smoothed_probabilities();
    const auto q_probs = q.smoothed_probabilities();
    double kl = 0.0;
    for (size_t b = 0; b < p_probs.size(); ++b) kl += p_probs[b] * std::log(p_probs[b] / q_probs[b]);
    return std::max(kl, 0.0);
}

LengthStats length_stats(const SequenceManifest &manifest) {
    if (manifest.entries.empty()) fail(TG_ERR_INVALID_ARGUMENT, "length_stats: empty manifest");
    double sums[3] = {0, 0, 0};
    uint64_t counts[3] = {0, 0, 0};
    for (const auto &entry : manifest.entries) {
        if (entry.dataset == Dataset::Reference) {
            sums[0] += static_cast<double>(entry.len);
            counts[0] += 1;
        }
        if (entry.label == Label::Correct) {
            sums[1] += static_cast<double>(entry.len);
            counts[1] += 1;
        } else if (entry.label == Label::Incorrect) {
            sums[2] += static_cast<double>(entry.len);
            counts[2] += 1;
        }
    }
    LengthStats stats;
    if (counts[0]) stats.original = sums[0] / static_cast<double>(counts[0]);
    if (counts[1]) stats.correct = sums[1] / static_cast<double>(counts[1]);
    if (counts[2]) stats.incorrect = sums[2] / static_cast<double>(counts[2]);
    return stats;
}

namespace {

struct GroupView {
    std::vector<AssignedSequence> assigned;
    std::vector<std::vector<SparseVector>> sparse;
    bool empty() const { return assigned.empty(); }
};

MetricValue group_entropy(const GroupView &group, const std::string &name) {
    if (group.empty()) return MetricValue::absent("no sequences in group '" + name + "'");
    return MetricValue::of(cluster_entropy(group.assigned));
}

std::optional<Histogram> group_histogram_sae(const GroupView &group, const MetricParams &params) {
    if (group.empty()) return std::nullopt;
    uint64_t pairs = 0;
    for (const auto &sequence : group.sparse)
        pairs += sequence.size() > 1 ? sequence.size() - 1 : 0;
    if (pairs == 0) return std::nullopt;
    return consecutive_similarity_distribution(group.sparse, params.bins, params.epsilon);
}

std::optional<Histogram> group_histogram_centroid(const GroupView &group,
                                                  const ClusterModel &model,
                                                  const MetricParams &params) {
    if (group.empty()) return std::nullopt;
    uint64_t pairs = 0;
    for (const auto &sequence : group.assigned)
        pairs += sequence.clusters.size() > 1 ? sequence.clusters.size() - 1 : 0;
    if (pairs == 0) return std::nullopt;
    return consecutive_similarity_distribution(group.assigned, model, params.bins, params.epsilon);
}

MetricValue histogram_kl(const std::optional<Histogram> &p, const std::optional<Histogram> &q,
                         const std::string &p_name, const std::string &q_name) {
    if (!p) return MetricValue::absent("no similarity pairs in group '" + p_name + "'");
    if (!q) return MetricValue::absent("no similarity pairs in group '" + q_name + "'");
    return MetricValue::of(kl_divergence(*p, *q));
}

MetricValue group_mean_min_dtw(const GroupView &group, const GroupView &originals,
                               const std::string &name, const MetricParams &params) {
    if (group.empty()) return MetricValue::absent("no sequences in group '" + name + "'");
    if (originals.empty()) return MetricValue::absent("no sequences in group 'original'");
    double sum = 0.0;
    for (const auto &sequence : group.sparse)
        sum += min_dtw_to_set(sequence, originals.sparse, params.dtw_subsample, params.seed,
                              params.dtw_cost);
    return MetricValue::of(sum / static_cast<double>(group.sparse.size()));
}

} // namespace

MetricReport full_report(std::span<const AssignedSequence> assigned,
                         std::span<const std::vector<SparseVector>> sparse_sequences,
                         const ClusterModel &model, const SequenceManifest &manifest,
                         const MetricParams &params) {
    if (assigned.size() != manifest.entries.size() ||
        sparse_sequences.size() != manifest.entries.size())
        fail(TG_ERR_INVALID_ARGUMENT, "full_report: inputs do not align with the manifest");
    for (size_t s = 0; s < assigned.size(); ++s) {
        if (assigned[s].clusters.size() != manifest.entries[s].len ||
            sparse_sequences[s].size() != manifest.entries[s].len)
            fail(TG_ERR_INVALID_ARGUMENT, "full_report: sequence '" + manifest.entries[s].id +
                                              "' length disagrees with the manifest");
    }

    GroupView original, correct, incorrect;
    for (size_t s = 0; s < manifest.entries.size(); ++s) {
        const auto &entry = manifest.entries[s];
        GroupView *group = nullptr;
        if (entry.dataset == Dataset::Reference)
            group = &original;
        else if (entry.label == Label::Correct)
            group = &correct;
        else if (entry.label == Label::Incorrect)
            group = &incorrect;
        if (!group) continue;
        group->assigned.push_back(assigned[s]);
        group->sparse.push_back(
            std::vector<SparseVector>(sparse_sequences[s].begin(), sparse_sequences[s].end()));
    }

    MetricReport report;
    report.entropy_original = group_entropy(original, "original");
    report.entropy_correct = group_entropy(correct, "correct");
    report.entropy_incorrect = group_entropy(incorrect, "incorrect");

    report.dtw_correct = group_mean_min_dtw(correct, original, "correct", params);
    report.dtw_incorrect = group_mean_min_dtw(incorrect, original, "incorrect", params);

    report.hist_sae_original = group_histogram_sae(original, params);
    report.hist_sae_correct = group_histogram_sae(correct, params);
    report.hist_sae_incorrect = group_histogram_sae(incorrect, params);
    report.kl_sae.corr_orig =
        histogram_kl(report.hist_sae_correct, report.hist_sae_original, "correct", "original");
    report.kl_sae.incorr_orig =
        histogram_kl(report.hist_sae_incorrect, report.hist_sae_original, "incorrect", "original");
    report.kl_sae.corr_incorr =
        histogram_kl(report.hist_sae_correct, report.hist_sae_incorrect, "correct", "incorrect");

    report.hist_centroid_original = group_histogram_centroid(original, model, params);
    report.hist_centroid_correct = group_histogram_centroid(correct, model, params);
    report.hist_centroid_incorrect = group_histogram_centroid(incorrect, model, params);
    report.kl_centroid.corr_orig = histogram_kl(report.hist_centroid_correct,
                                                report.hist_centroid_original, "correct",
                                                "original");
    report.kl_centroid.incorr_orig = histogram_kl(report.hist_centroid_incorrect,
                                                  report.hist_centroid_original, "incorrect",
                                                  "original");
    report.kl_centroid.corr_incorr = histogram_kl(report.hist_centroid_correct,
                                                  report.hist_centroid_incorrect, "correct",
                                                  "incorrect");

    const LengthStats lengths = length_stats(manifest);
    report.length_original = lengths.original
                                 ? MetricValue::of(*lengths.original)
                                 : MetricValue::absent("no reference sequences");
    report.length_correct = lengths.correct ? MetricValue::of(*lengths.correct)
                                            : MetricValue::absent("no sequences labeled correct");
    report.length_incorrect = lengths.incorrect
                                  ? MetricValue::of(*lengths.incorrect)
                                  : MetricValue::absent("no sequences labeled incorrect");
    return report;
}

namespace {

void render_value(std::ostringstream &out, const char *name, const MetricValue &value) {
    char line[128];
    if (value.value) {
        std::snprintf(line, sizeof(line), "%-12s %.6f\n", name, *value.value);
        out << line;
    } else {
        out << name;
        for (size_t pad = std::char_traits<char>::length(name); pad < 13; ++pad) out << ' ';
        out << "absent: " << value.note << '\n';
    }
}

} // namespace

std::string render_report(const MetricReport &report) {
    std::ostringstream out;
    out << "# metric report\n";
    out << "\n[entropy]\n";
    render_value(out, "original", report.entropy_original);
    render_value(out, "correct", report.entropy_correct);
    render_value(out, "incorrect", report.entropy_incorrect);
    out << "\n[dtw]\n";
    render_value(out, "correct", report.dtw_correct);
    render_value(out, "incorrect", report.dtw_incorrect);
    out << "\n[kl-sae]\n";
    render_value(out, "corr-orig", report.kl_sae.corr_orig);
    render_value(out, "incorr-orig", report.kl_sae.incorr_orig);
    render_value(out, "corr-incorr", report.kl_sae.corr_incorr);
    out << "\n[kl-centroid]\n";
    render_value(out, "corr-orig", report.kl_centroid.corr_orig);
    render_value(out, "incorr-orig", report.kl_centroid.incorr_orig);
    render_value(out, "corr-incorr", report.kl_centroid.corr_incorr);
    out << "\n[length]\n";
    render_value(out, "original", report.length_original);
    render_value(out, "correct", report.length_correct);
    render_value(out, "incorrect", report.length_incorrect);
    return out.str();
}

void write_histogram_tsv(const Histogram &histogram, const std::string &path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(TG_ERR_IO, "cannot open for writing: " + path);
    out << "bin_left\tbin_right\tcount\n";
    char row[128];
    for (size_t b = 0; b < histogram.counts.size(); ++b) {
        std::snprintf(row, sizeof(row), "%.6f\t%.6f\t%llu\n", histogram.bin_edges[b],
                      histogram.bin_edges[b + 1],
                      static_cast<unsigned long long>(histogram.counts[b]));
        out << row;
    }
    out.flush();
    if (!out) fail(TG_ERR_IO, "histogram '" + path + "': write failed");
}

} // namespace tg
