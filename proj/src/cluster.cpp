#include "cluster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "error.hpp"
#include "io_util.hpp"
#include "rng.hpp"

namespace tg {

using nlohmann::json;

namespace {
constexpr char kMagic[4] = {'K', 'M', 'C', '1'};
constexpr uint32_t kVersion = 1;
constexpr double kZeroNorm = 1e-300;
} // namespace

double cosine_distance(const SparseVector &a, const SparseVector &b) {
    if (a.dim != b.dim)
        fail(TG_ERR_DIM_MISMATCH, "cosine_distance: dims " + std::to_string(a.dim) + " vs " +
                                      std::to_string(b.dim));
    const double norms = a.norm() * b.norm();
    if (norms < kZeroNorm) return 1.0;
    return 1.0 - dot(a, b) / norms;
}

double cosine_distance(const SparseVector &a, std::span<const double> b) {
    if (a.dim != b.size())
        fail(TG_ERR_DIM_MISMATCH, "cosine_distance: dims " + std::to_string(a.dim) + " vs " +
                                      std::to_string(b.size()));
    double b_norm_sq = 0.0;
    for (double v : b) b_norm_sq += v * v;
    const double norms = a.norm() * std::sqrt(b_norm_sq);
    if (norms < kZeroNorm) return 1.0;
    return 1.0 - dot(a, b) / norms;
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        fail(TG_ERR_DIM_MISMATCH, "cosine_distance: dims " + std::to_string(a.size()) + " vs " +
                                      std::to_string(b.size()));
    double dot_ab = 0.0, a_sq = 0.0, b_sq = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot_ab += a[i] * b[i];
        a_sq += a[i] * a[i];
        b_sq += b[i] * b[i];
    }
    const double norms = std::sqrt(a_sq) * std::sqrt(b_sq);
    if (norms < kZeroNorm) return 1.0;
    return 1.0 - dot_ab / norms;
}

namespace {

// Distance from a point (with cached norm) to a unit-norm centroid.
double point_centroid_distance(const SparseVector &point, double point_norm,
                               std::span<const double> centroid) {
    if (point_norm < kZeroNorm) return 1.0;
    return 1.0 - dot(point, centroid) / point_norm;
}

void normalize_into(const SparseVector &point, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double norm = point.norm();
    if (norm < kZeroNorm) return;
    for (size_t i = 0; i < point.indices.size(); ++i)
        out[point.indices[i]] = point.values[i] / norm;
}

uint32_t nearest_centroid(const ClusterModel &model, const SparseVector &point,
                          double point_norm) {
    uint32_t best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (uint32_t c = 0; c < model.num_clusters; ++c) {
        const double distance = point_centroid_distance(point, point_norm, model.centroid(c));
        if (distance < best_distance) {
            best_distance = distance;
            best = c;
        }
    }
    return best;
}

} // namespace

ClusterModel fit(std::span<const SparseVector> vectors, uint32_t num_clusters, uint32_t max_iters,
                 double tol, uint64_t seed, const IterationLogger &logger) {
    if (num_clusters < 2) fail(TG_ERR_INVALID_ARGUMENT, "fit: need at least 2 clusters");
    if (vectors.size() < num_clusters)
        fail(TG_ERR_INVALID_ARGUMENT, "fit: sample of " + std::to_string(vectors.size()) +
                                          " vectors is smaller than K = " +
                                          std::to_string(num_clusters));
    if (max_iters == 0) fail(TG_ERR_INVALID_ARGUMENT, "fit: max_iters must be > 0");
    if (tol < 0.0) fail(TG_ERR_INVALID_ARGUMENT, "fit: tol must be >= 0");

    const uint32_t dim = vectors.front().dim;
    std::vector<double> norms(vectors.size());
    bool any_nonzero = false;
    for (size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].dim != dim)
            fail(TG_ERR_DIM_MISMATCH, "fit: inconsistent vector dims");
        norms[i] = vectors[i].norm();
        any_nonzero |= norms[i] >= kZeroNorm;
    }
    if (!any_nonzero) fail(TG_ERR_INVALID_ARGUMENT, "fit: all sample vectors are zero");

    ClusterModel model;
    model.num_clusters = num_clusters;
    model.dim = dim;
    model.seed = seed;
    model.centroids.assign(static_cast<size_t>(num_clusters) * dim, 0.0);

    Rng rng(derive_seed(seed, "kmeans++"));

    // k-means++ seeding: first centroid uniform over nonzero points, then
    // D^2 sampling on cosine distances to the nearest chosen centroid.
    {
        size_t first;
        do {
            first = static_cast<size_t>(rng.uniform_below(vectors.size()));
        } while (norms[first] < kZeroNorm);
        normalize_into(vectors[first], {model.centroids.data(), dim});

        std::vector<double> nearest(vectors.size());
        for (size_t i = 0; i < vectors.size(); ++i)
            nearest[i] = point_centroid_distance(vectors[i], norms[i], model.centroid(0));

        std::vector<double> weights(vectors.size());
        for (uint32_t c = 1; c < num_clusters; ++c) {
            double total = 0.0;
            for (size_t i = 0; i < vectors.size(); ++i) {
                weights[i] = norms[i] < kZeroNorm ? 0.0 : nearest[i] * nearest[i];
                total += weights[i];
            }
            size_t chosen;
            if (total > 0.0) {
                chosen = rng.discrete(weights);
            } else {
                // All remaining mass covered; fall back to a uniform nonzero point.
                do {
                    chosen = static_cast<size_t>(rng.uniform_below(vectors.size()));
                } while (norms[chosen] < kZeroNorm);
            }
            normalize_into(vectors[chosen],
                           {model.centroids.data() + static_cast<size_t>(c) * dim, dim});
            for (size_t i = 0; i < vectors.size(); ++i)
                nearest[i] = std::min(nearest[i], point_centroid_distance(vectors[i], norms[i],
                                                                          model.centroid(c)));
        }
    }

    // Lloyd iterations.
    std::vector<uint32_t> assignments(vectors.size(), 0);
    std::vector<uint32_t> previous(vectors.size(), num_clusters); // sentinel: differs everywhere
    std::vector<double> sums(static_cast<size_t>(num_clusters) * dim);
    std::vector<uint64_t> counts(num_clusters);
    double previous_objective = std::numeric_limits<double>::infinity();

    for (uint32_t iter = 0; iter < max_iters; ++iter) {
        for (size_t i = 0; i < vectors.size(); ++i)
            assignments[i] = nearest_centroid(model, vectors[i], norms[i]);
        if (assignments == previous) break;

        // Update: centroid = normalized mean of member unit directions.
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (size_t i = 0; i < vectors.size(); ++i) {
            counts[assignments[i]] += 1;
            if (norms[i] < kZeroNorm) continue;
            double *sum = sums.data() + static_cast<size_t>(assignments[i]) * dim;
            const auto &v = vectors[i];
            for (size_t t = 0; t < v.indices.size(); ++t)
                sum[v.indices[t]] += v.values[t] / norms[i];
        }
        std::vector<uint32_t> needs_reseed;
        for (uint32_t c = 0; c < num_clusters; ++c) {
            double *sum = sums.data() + static_cast<size_t>(c) * dim;
            double norm_sq = 0.0;
            for (uint32_t r = 0; r < dim; ++r) norm_sq += sum[r] * sum[r];
            if (counts[c] == 0 || norm_sq < kZeroNorm) {
                needs_reseed.push_back(c);
                continue;
            }
            const double inv = 1.0 / std::sqrt(norm_sq);
            double *centroid = model.centroids.data() + static_cast<size_t>(c) * dim;
            for (uint32_t r = 0; r < dim; ++r) centroid[r] = sum[r] * inv;
        }
        // Reseed empty clusters to the point farthest from their old centroid.
        // An empty cluster has no members, so this leaves the objective alone.
        std::vector<char> taken(vectors.size(), 0);
        for (uint32_t c : needs_reseed) {
            double farthest = -1.0;
            size_t pick = vectors.size();
            for (size_t i = 0; i < vectors.size(); ++i) {
                if (taken[i] || norms[i] < kZeroNorm) continue;
                const double distance =
                    point_centroid_distance(vectors[i], norms[i], model.centroid(c));
                if (distance > farthest) {
                    farthest = distance;
                    pick = i;
                }
            }
            if (pick == vectors.size()) continue; // nothing usable; keep the old centroid
            taken[pick] = 1;
            normalize_into(vectors[pick],
                           {model.centroids.data() + static_cast<size_t>(c) * dim, dim});
        }

        double objective = 0.0;
        for (size_t i = 0; i < vectors.size(); ++i)
            objective +=
                point_centroid_distance(vectors[i], norms[i], model.centroid(assignments[i]));
        if (logger) logger(iter, objective);

        previous = assignments;
        if (previous_objective - objective < tol && previous_objective != std::numeric_limits<double>::infinity())
            break;
        previous_objective = objective;
    }

    // Final inertia under the final centroids, recomputable from the sample.
    model.inertia = 0.0;
    for (size_t i = 0; i < vectors.size(); ++i) {
        const uint32_t c = nearest_centroid(model, vectors[i], norms[i]);
        model.inertia += point_centroid_distance(vectors[i], norms[i], model.centroid(c));
    }
    return model;
}

uint32_t assign(const ClusterModel &model, const SparseVector &v) {
    if (v.dim != model.dim)
        fail(TG_ERR_DIM_MISMATCH, "assign: vector dim " + std::to_string(v.dim) +
                                      " vs centroid dim " + std::to_string(model.dim));
    return nearest_centroid(model, v, v.norm());
}

std::vector<AssignedSequence> assign_corpus(const ClusterModel &model,
                                            std::span<const std::vector<SparseVector>> sequences,
                                            const SequenceManifest &manifest) {
    if (sequences.size() != manifest.entries.size())
        fail(TG_ERR_INVALID_ARGUMENT, "assign_corpus: sequence count does not match manifest");
    std::vector<AssignedSequence> assigned;
    assigned.reserve(sequences.size());
    for (size_t s = 0; s < sequences.size(); ++s) {
        AssignedSequence sequence;
        sequence.id = manifest.entries[s].id;
        sequence.clusters.reserve(sequences[s].size());
        for (const auto &v : sequences[s]) sequence.clusters.push_back(assign(model, v));
        assigned.push_back(std::move(sequence));
    }
    return assigned;
}

std::vector<SparseVector> sample_subset(std::span<const std::vector<SparseVector>> sequences,
                                        uint64_t max_count, uint64_t seed) {
    uint64_t total = 0;
    for (const auto &sequence : sequences) total += sequence.size();
    std::vector<const SparseVector *> flat;
    flat.reserve(total);
    for (const auto &sequence : sequences)
        for (const auto &v : sequence) flat.push_back(&v);

    Rng rng(derive_seed(seed, "cluster-sample"));
    std::vector<SparseVector> sample;
    if (total <= max_count) {
        sample.reserve(total);
        for (const auto *v : flat) sample.push_back(*v);
        return sample;
    }
    auto picks = rng.sample_indices(total, max_count);
    std::sort(picks.begin(), picks.end());
    sample.reserve(picks.size());
    for (uint64_t i : picks) sample.push_back(*flat[i]);
    return sample;
}

void save_centroids(const ClusterModel &model, const std::string &path) {
    auto out = open_output(path);
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, model.num_clusters);
    put_u32(out, model.dim);
    for (double v : model.centroids) put_f32(out, static_cast<float>(v));
    put_f64(out, model.inertia);
    out.flush();
    if (!out) fail(TG_ERR_IO, "KMC1 '" + path + "': write failed");
}

ClusterModel load_centroids(const std::string &path) {
    auto in = open_input(path);
    check_header(in, kMagic, kVersion, "KMC1 '" + path + "'");
    ClusterModel model;
    if (!get_u32(in, model.num_clusters) || !get_u32(in, model.dim))
        fail(TG_ERR_TRUNCATED, "KMC1 '" + path + "': truncated header");
    if (model.num_clusters < 2 || model.dim == 0)
        fail(TG_ERR_PARSE, "KMC1 '" + path + "': invalid K or dim");
    model.centroids.resize(static_cast<size_t>(model.num_clusters) * model.dim);
    for (double &v : model.centroids) {
        float f = 0.0f;
        if (!get_f32(in, f)) fail(TG_ERR_TRUNCATED, "KMC1 '" + path + "': truncated centroids");
        if (!std::isfinite(f)) fail(TG_ERR_NON_FINITE, "KMC1 '" + path + "': non-finite centroid");
        v = static_cast<double>(f);
    }
    if (!get_f64(in, model.inertia))
        fail(TG_ERR_TRUNCATED, "KMC1 '" + path + "': truncated inertia");
    check_no_trailing(in, "KMC1 '" + path + "'");
    return model;
}

void write_assignments(std::span<const AssignedSequence> assigned, const std::string &path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(TG_ERR_IO, "cannot open for writing: " + path);
    for (const auto &sequence : assigned) {
        json record;
        record["id"] = sequence.id;
        record["clusters"] = sequence.clusters;
        out << record.dump() << '\n';
    }
    out.flush();
    if (!out) fail(TG_ERR_IO, "assignments '" + path + "': write failed");
}

std::vector<AssignedSequence> read_assignments(const std::string &path) {
    std::ifstream in(path);
    if (!in) fail(TG_ERR_IO, "cannot open for reading: " + path);
    std::vector<AssignedSequence> result;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object())
            fail(TG_ERR_PARSE,
                 "assignments '" + path + "' line " + std::to_string(line_no) + ": bad record");
        try {
            AssignedSequence sequence;
            sequence.id = record.at("id").get<std::string>();
            sequence.clusters = record.at("clusters").get<std::vector<uint32_t>>();
            result.push_back(std::move(sequence));
        } catch (const json::exception &e) {
            fail(TG_ERR_PARSE,
                 "assignments '" + path + "' line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return result;
}

} // namespace tg
