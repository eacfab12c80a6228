#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "manifest.hpp"
#include "sparse_vector.hpp"

namespace tg {

// Spherical k-means model: K unit-norm centroids in the latent space.
struct ClusterModel {
    uint32_t num_clusters = 0;        // K
    uint32_t dim = 0;                 // n
    std::vector<double> centroids;    // K x n, row-major, unit rows post-fit
    uint64_t seed = 0;
    double inertia = 0.0;             // sum of cosine distances on the fit sample

    std::span<const double> centroid(uint32_t c) const {
        return {centroids.data() + static_cast<size_t>(c) * dim, dim};
    }
};

struct AssignedSequence {
    std::string id;
    std::vector<uint32_t> clusters;
};

// 1 - a.b / (|a||b|); a zero-norm operand on either side yields 1.
double cosine_distance(const SparseVector &a, const SparseVector &b);
double cosine_distance(const SparseVector &a, std::span<const double> b);
double cosine_distance(std::span<const double> a, std::span<const double> b);

using IterationLogger = std::function<void(uint32_t iteration, double objective)>;

// k-means++ seeding under cosine distance, then Lloyd iterations. Centroids
// update to the normalized mean of their members' unit directions (the
// minimizer of summed cosine distance on the sphere, which keeps the logged
// objective non-increasing). Empty clusters reseed to the sample point
// farthest from their previous centroid. Stops when assignments are stable,
// the objective improves by less than tol, or max_iters is reached.
ClusterModel fit(std::span<const SparseVector> vectors, uint32_t num_clusters, uint32_t max_iters,
                 double tol, uint64_t seed, const IterationLogger &logger = nullptr);

// Argmin of cosine distance over centroids; ties break toward the lower id.
uint32_t assign(const ClusterModel &model, const SparseVector &v);

// Per-token assign, preserving sequence structure and manifest ids.
std::vector<AssignedSequence> assign_corpus(const ClusterModel &model,
                                            std::span<const std::vector<SparseVector>> sequences,
                                            const SequenceManifest &manifest);

// Seeded uniform subsample (without replacement) used to cap the fit input.
std::vector<SparseVector> sample_subset(std::span<const std::vector<SparseVector>> sequences,
                                        uint64_t max_count, uint64_t seed);

// KMC1: magic, version u32(=1), K u32, n u32, K*n f32 centroids, inertia f64.
void save_centroids(const ClusterModel &model, const std::string &path);
ClusterModel load_centroids(const std::string &path);

// Assignment sidecar: one {"id":..., "clusters":[...]} object per line.
void write_assignments(std::span<const AssignedSequence> assigned, const std::string &path);
std::vector<AssignedSequence> read_assignments(const std::string &path);

} // namespace tg
