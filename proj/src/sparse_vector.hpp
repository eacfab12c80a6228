#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace tg {

// A token's SAE latent code: the retrieved activations at their latent
// indices, zeros elsewhere. Indices are strictly increasing; explicit zeros
// are allowed (a TopK selection keeps its k slots even when a selected
// pre-activation is exactly zero).
struct SparseVector {
    uint32_t dim = 0;
    std::vector<uint32_t> indices; // strictly increasing, each < dim
    std::vector<double> values;    // parallel to indices

    size_t nnz() const { return indices.size(); }

    std::vector<double> densify() const {
        std::vector<double> dense(dim, 0.0);
        for (size_t i = 0; i < indices.size(); ++i) dense[indices[i]] = values[i];
        return dense;
    }

    double norm() const {
        double sum_sq = 0.0;
        for (double v : values) sum_sq += v * v;
        return std::sqrt(sum_sq);
    }
};

inline double dot(const SparseVector &a, const SparseVector &b) {
    double sum = 0.0;
    size_t i = 0, j = 0;
    while (i < a.indices.size() && j < b.indices.size()) {
        if (a.indices[i] < b.indices[j]) {
            ++i;
        } else if (a.indices[i] > b.indices[j]) {
            ++j;
        } else {
            sum += a.values[i] * b.values[j];
            ++i;
            ++j;
        }
    }
    return sum;
}

inline double dot(const SparseVector &a, std::span<const double> dense) {
    double sum = 0.0;
    for (size_t i = 0; i < a.indices.size(); ++i) sum += a.values[i] * dense[a.indices[i]];
    return sum;
}

} // namespace tg
