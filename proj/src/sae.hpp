#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "embedding_store.hpp"
#include "manifest.hpp"
#include "sparse_vector.hpp"

namespace tg {

struct SaeConfig {
    uint32_t input_dim = 0;    // d
    uint32_t latent_dim = 0;   // n, overcomplete: n >= d
    uint32_t top_k = 32;       // k <= n
    double learning_rate = 0.05;
    uint32_t epochs = 3;
    uint32_t batch_size = 256;
    uint64_t seed = 0;
};

// TopK sparse autoencoder. Encoder: u = W_enc (x - b_pre) + b_enc, keep the
// k largest pre-activations. Decoder: x_hat = W_dec z + b_pre. Parameters are
// held in double; checkpoints are float32.
struct SaeModel {
    SaeConfig config;
    std::vector<double> w_enc; // n x d, row-major
    std::vector<double> b_enc; // n
    std::vector<double> w_dec; // d x n, row-major
    std::vector<double> b_pre; // d

    std::span<const double> enc_row(uint32_t i) const {
        return {w_enc.data() + static_cast<size_t>(i) * config.input_dim, config.input_dim};
    }
};

void validate_sae_config(const SaeConfig &config);

// Zeroes all but the k largest entries; ties break toward the lower index.
std::vector<double> topk(std::span<const double> v, uint32_t k);

// The k selected positions of topk(v, k), sorted ascending.
std::vector<uint32_t> topk_indices(std::span<const double> v, uint32_t k);

// W_enc uniform in [-1/sqrt(d), 1/sqrt(d)], W_dec = W_enc^T, b_pre = data
// mean, b_enc = 0. The transpose-tied init keeps early TopK selections and
// reconstructions aligned.
SaeModel init_model(const SaeConfig &config, const EmbeddingStore &store);

SparseVector encode(const SaeModel &model, std::span<const float> x);
SparseVector encode(const SaeModel &model, std::span<const double> x);
std::vector<double> decode(const SaeModel &model, const SparseVector &z);

// Mean over the batch of ||x - x_hat||^2.
double reconstruction_loss(const SaeModel &model, const EmbeddingStore &batch);

struct SaeGradients {
    std::vector<double> w_enc;
    std::vector<double> b_enc;
    std::vector<double> w_dec;
    std::vector<double> b_pre;
};

// Gradients of the batch-mean reconstruction loss; the TopK selection is
// treated as a constant mask within the step.
SaeGradients loss_gradients(const SaeModel &model, const EmbeddingStore &batch,
                            double *out_loss = nullptr);

// One full-batch gradient-descent update, in place. Returns the pre-update
// loss. A non-finite gradient aborts the step with an error.
double train_step(SaeModel &model, const EmbeddingStore &batch, double learning_rate);

using EpochLogger = std::function<void(uint32_t epoch, double mean_loss)>;

// epochs passes of seeded-shuffled minibatches (tail batch included).
SaeModel train(const SaeConfig &config, const EmbeddingStore &store,
               const EpochLogger &logger = nullptr);

// Per-token encode, grouped by manifest sequences in manifest order.
std::vector<std::vector<SparseVector>> extract_sparse(const SaeModel &model,
                                                      const EmbeddingStore &store,
                                                      const SequenceManifest &manifest);

// SAE1: magic, version u32(=1), d, n, k u32, then W_enc, b_enc, W_dec, b_pre
// as f32 arrays, row-major. Round-trips bit-exactly.
void save_sae(const SaeModel &model, const std::string &path);
SaeModel load_sae(const std::string &path);

} // namespace tg
