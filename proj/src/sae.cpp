#include "sae.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "error.hpp"
#include "io_util.hpp"
#include "rng.hpp"

namespace tg {

namespace {
constexpr char kMagic[4] = {'S', 'A', 'E', '1'};
constexpr uint32_t kVersion = 1;
} // namespace

void validate_sae_config(const SaeConfig &config) {
    if (config.input_dim == 0) fail(TG_ERR_INVALID_ARGUMENT, "sae config: input_dim must be > 0");
    if (config.latent_dim == 0)
        fail(TG_ERR_INVALID_ARGUMENT, "sae config: latent_dim must be > 0");
    if (config.latent_dim < config.input_dim)
        fail(TG_ERR_INVALID_ARGUMENT,
             "sae config: latent_dim " + std::to_string(config.latent_dim) +
                 " must be >= input_dim " + std::to_string(config.input_dim) +
                 " (overcomplete dictionary)");
    if (config.top_k == 0 || config.top_k > config.latent_dim)
        fail(TG_ERR_INVALID_ARGUMENT, "sae config: top_k must be in [1, latent_dim]");
    if (!(config.learning_rate > 0.0))
        fail(TG_ERR_INVALID_ARGUMENT, "sae config: learning_rate must be > 0");
    if (config.batch_size == 0)
        fail(TG_ERR_INVALID_ARGUMENT, "sae config: batch_size must be > 0");
}

std::vector<uint32_t> topk_indices(std::span<const double> v, uint32_t k) {
    const uint32_t n = static_cast<uint32_t>(v.size());
    if (k > n) fail(TG_ERR_INVALID_ARGUMENT, "topk: k exceeds vector length");
    std::vector<uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    // Larger value first; on equal values the lower index wins.
    const auto before = [&v](uint32_t a, uint32_t b) {
        return v[a] > v[b] || (v[a] == v[b] && a < b);
    };
    std::nth_element(order.begin(), order.begin() + k, order.end(), before);
    order.resize(k);
    std::sort(order.begin(), order.end());
    return order;
}

std::vector<double> topk(std::span<const double> v, uint32_t k) {
    std::vector<double> result(v.size(), 0.0);
    for (uint32_t i : topk_indices(v, k)) result[i] = v[i];
    return result;
}

SaeModel init_model(const SaeConfig &config, const EmbeddingStore &store) {
    validate_sae_config(config);
    if (store.dim != config.input_dim)
        fail(TG_ERR_DIM_MISMATCH, "sae init: store dim " + std::to_string(store.dim) +
                                      " vs config input_dim " + std::to_string(config.input_dim));

    const uint32_t d = config.input_dim;
    const uint32_t n = config.latent_dim;
    SaeModel model;
    model.config = config;
    model.w_enc.resize(static_cast<size_t>(n) * d);
    model.b_enc.assign(n, 0.0);
    model.w_dec.resize(static_cast<size_t>(d) * n);
    model.b_pre.assign(d, 0.0);

    Rng rng(derive_seed(config.seed, "sae-init"));
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (auto &w : model.w_enc) w = (2.0 * rng.uniform() - 1.0) * scale;
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t r = 0; r < d; ++r)
            model.w_dec[static_cast<size_t>(r) * n + i] = model.w_enc[static_cast<size_t>(i) * d + r];

    if (store.num_tokens > 0) {
        for (uint64_t t = 0; t < store.num_tokens; ++t) {
            const auto row = store.row(t);
            for (uint32_t r = 0; r < d; ++r) model.b_pre[r] += row[r];
        }
        for (uint32_t r = 0; r < d; ++r) model.b_pre[r] /= static_cast<double>(store.num_tokens);
    }
    return model;
}

namespace {

// Pre-activation u = W_enc (x - b_pre) + b_enc.
template <typename Scalar>
void pre_activation(const SaeModel &model, std::span<const Scalar> x, std::vector<double> &centered,
                    std::vector<double> &u) {
    const uint32_t d = model.config.input_dim;
    const uint32_t n = model.config.latent_dim;
    if (x.size() != d)
        fail(TG_ERR_DIM_MISMATCH, "encode: input has dim " + std::to_string(x.size()) +
                                      " but the model expects " + std::to_string(d));
    centered.resize(d);
    for (uint32_t r = 0; r < d; ++r) {
        const double value = static_cast<double>(x[r]);
        if (!std::isfinite(value)) fail(TG_ERR_NON_FINITE, "encode: non-finite input");
        centered[r] = value - model.b_pre[r];
    }
    u.resize(n);
    for (uint32_t i = 0; i < n; ++i) {
        const double *row = model.w_enc.data() + static_cast<size_t>(i) * d;
        double acc = model.b_enc[i];
        for (uint32_t r = 0; r < d; ++r) acc += row[r] * centered[r];
        u[i] = acc;
    }
}

template <typename Scalar>
SparseVector encode_impl(const SaeModel &model, std::span<const Scalar> x) {
    std::vector<double> centered, u;
    pre_activation(model, x, centered, u);
    SparseVector z;
    z.dim = model.config.latent_dim;
    z.indices = topk_indices(u, model.config.top_k);
    z.values.reserve(z.indices.size());
    for (uint32_t i : z.indices) z.values.push_back(u[i]);
    return z;
}

} // namespace

SparseVector encode(const SaeModel &model, std::span<const float> x) {
    return encode_impl(model, x);
}

SparseVector encode(const SaeModel &model, std::span<const double> x) {
    return encode_impl(model, x);
}

std::vector<double> decode(const SaeModel &model, const SparseVector &z) {
    const uint32_t d = model.config.input_dim;
    const uint32_t n = model.config.latent_dim;
    if (z.dim != n)
        fail(TG_ERR_DIM_MISMATCH, "decode: sparse vector dim " + std::to_string(z.dim) +
                                      " but the model latent dim is " + std::to_string(n));
    std::vector<double> x_hat(model.b_pre.begin(), model.b_pre.end());
    for (size_t t = 0; t < z.indices.size(); ++t) {
        const uint32_t i = z.indices[t];
        if (i >= n) fail(TG_ERR_OUT_OF_RANGE, "decode: latent index out of range");
        const double a = z.values[t];
        for (uint32_t r = 0; r < d; ++r) x_hat[r] += a * model.w_dec[static_cast<size_t>(r) * n + i];
    }
    return x_hat;
}

double reconstruction_loss(const SaeModel &model, const EmbeddingStore &batch) {
    if (batch.num_tokens == 0) fail(TG_ERR_INVALID_ARGUMENT, "reconstruction_loss: empty batch");
    double total = 0.0;
    for (uint64_t t = 0; t < batch.num_tokens; ++t) {
        const auto x = batch.row(t);
        const auto x_hat = decode(model, encode(model, x));
        for (uint32_t r = 0; r < model.config.input_dim; ++r) {
            const double diff = static_cast<double>(x[r]) - x_hat[r];
            total += diff * diff;
        }
    }
    return total / static_cast<double>(batch.num_tokens);
}

SaeGradients loss_gradients(const SaeModel &model, const EmbeddingStore &batch, double *out_loss) {
    if (batch.num_tokens == 0) fail(TG_ERR_INVALID_ARGUMENT, "train_step: empty batch");
    if (batch.dim != model.config.input_dim)
        fail(TG_ERR_DIM_MISMATCH, "train_step: batch dim " + std::to_string(batch.dim) +
                                      " vs model input_dim " +
                                      std::to_string(model.config.input_dim));

    const uint32_t d = model.config.input_dim;
    const uint32_t n = model.config.latent_dim;
    const double inv_batch = 1.0 / static_cast<double>(batch.num_tokens);

    SaeGradients grads;
    grads.w_enc.assign(model.w_enc.size(), 0.0);
    grads.b_enc.assign(model.b_enc.size(), 0.0);
    grads.w_dec.assign(model.w_dec.size(), 0.0);
    grads.b_pre.assign(model.b_pre.size(), 0.0);

    std::vector<double> centered, u, residual(d);
    double loss = 0.0;
    for (uint64_t t = 0; t < batch.num_tokens; ++t) {
        const auto x = batch.row(t);
        pre_activation(model, std::span<const float>(x), centered, u);
        const auto active = topk_indices(u, model.config.top_k);

        // residual = x_hat - x, with x_hat = b_pre + sum_i z_i * W_dec[:, i].
        for (uint32_t r = 0; r < d; ++r)
            residual[r] = model.b_pre[r] - static_cast<double>(x[r]);
        for (uint32_t i : active) {
            const double z_i = u[i];
            for (uint32_t r = 0; r < d; ++r)
                residual[r] += z_i * model.w_dec[static_cast<size_t>(r) * n + i];
        }
        for (uint32_t r = 0; r < d; ++r) loss += residual[r] * residual[r];

        // dL/dx_hat, already scaled by the batch mean.
        for (uint32_t r = 0; r < d; ++r) {
            const double s = 2.0 * inv_batch * residual[r];
            grads.b_pre[r] += s;
        }
        for (uint32_t i : active) {
            const double z_i = u[i];
            double g_z = 0.0;
            for (uint32_t r = 0; r < d; ++r) {
                const double s = 2.0 * inv_batch * residual[r];
                grads.w_dec[static_cast<size_t>(r) * n + i] += s * z_i;
                g_z += model.w_dec[static_cast<size_t>(r) * n + i] * s;
            }
            grads.b_enc[i] += g_z;
            double *w_enc_grad_row = grads.w_enc.data() + static_cast<size_t>(i) * d;
            const double *w_enc_row = model.w_enc.data() + static_cast<size_t>(i) * d;
            for (uint32_t r = 0; r < d; ++r) {
                w_enc_grad_row[r] += g_z * centered[r];
                grads.b_pre[r] -= g_z * w_enc_row[r];
            }
        }
    }
    if (out_loss) *out_loss = loss * inv_batch;
    return grads;
}

double train_step(SaeModel &model, const EmbeddingStore &batch, double learning_rate) {
    double loss = 0.0;
    const SaeGradients grads = loss_gradients(model, batch, &loss);

    const auto finite = [](const std::vector<double> &values) {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    };
    if (!finite(grads.w_enc) || !finite(grads.b_enc) || !finite(grads.w_dec) ||
        !finite(grads.b_pre))
        fail(TG_ERR_NUMERIC, "train_step: non-finite gradient, step aborted");

    for (size_t i = 0; i < model.w_enc.size(); ++i) model.w_enc[i] -= learning_rate * grads.w_enc[i];
    for (size_t i = 0; i < model.b_enc.size(); ++i) model.b_enc[i] -= learning_rate * grads.b_enc[i];
    for (size_t i = 0; i < model.w_dec.size(); ++i) model.w_dec[i] -= learning_rate * grads.w_dec[i];
    for (size_t i = 0; i < model.b_pre.size(); ++i) model.b_pre[i] -= learning_rate * grads.b_pre[i];
    return loss;
}

SaeModel train(const SaeConfig &config, const EmbeddingStore &store, const EpochLogger &logger) {
    validate_sae_config(config);
    if (store.dim != config.input_dim)
        fail(TG_ERR_DIM_MISMATCH, "train: store dim " + std::to_string(store.dim) +
                                      " vs config input_dim " + std::to_string(config.input_dim));

    SaeModel model = init_model(config, store);
    if (config.epochs == 0 || store.num_tokens == 0) return model;

    Rng shuffle_rng(derive_seed(config.seed, "sae-shuffle"));
    std::vector<uint64_t> order(store.num_tokens);
    std::iota(order.begin(), order.end(), uint64_t{0});

    EmbeddingStore batch;
    batch.dim = store.dim;
    for (uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss = 0.0;
        uint64_t num_batches = 0;
        for (uint64_t begin = 0; begin < order.size(); begin += config.batch_size) {
            const uint64_t end = std::min<uint64_t>(begin + config.batch_size, order.size());
            batch.num_tokens = end - begin;
            batch.data.resize(batch.num_tokens * batch.dim);
            for (uint64_t b = begin; b < end; ++b) {
                const auto row = store.row(order[b]);
                std::copy(row.begin(), row.end(),
                          batch.data.begin() + (b - begin) * batch.dim);
            }
            epoch_loss += train_step(model, batch, config.learning_rate);
            ++num_batches;
        }
        if (logger) logger(epoch, epoch_loss / static_cast<double>(num_batches));
    }
    return model;
}

std::vector<std::vector<SparseVector>> extract_sparse(const SaeModel &model,
                                                      const EmbeddingStore &store,
                                                      const SequenceManifest &manifest) {
    validate_manifest(manifest, store.num_tokens);
    if (store.dim != model.config.input_dim)
        fail(TG_ERR_DIM_MISMATCH, "extract_sparse: store dim " + std::to_string(store.dim) +
                                      " vs model input_dim " +
                                      std::to_string(model.config.input_dim));
    std::vector<std::vector<SparseVector>> sequences;
    sequences.reserve(manifest.entries.size());
    for (const auto &entry : manifest.entries) {
        std::vector<SparseVector> tokens;
        tokens.reserve(entry.len);
        for (uint64_t t = 0; t < entry.len; ++t)
            tokens.push_back(encode(model, store.row(entry.start + t)));
        sequences.push_back(std::move(tokens));
    }
    return sequences;
}

void save_sae(const SaeModel &model, const std::string &path) {
    auto out = open_output(path);
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, model.config.input_dim);
    put_u32(out, model.config.latent_dim);
    put_u32(out, model.config.top_k);
    const auto put_array = [&out](const std::vector<double> &values) {
        for (double v : values) put_f32(out, static_cast<float>(v));
    };
    put_array(model.w_enc);
    put_array(model.b_enc);
    put_array(model.w_dec);
    put_array(model.b_pre);
    out.flush();
    if (!out) fail(TG_ERR_IO, "SAE1 '" + path + "': write failed");
}

SaeModel load_sae(const std::string &path) {
    auto in = open_input(path);
    check_header(in, kMagic, kVersion, "SAE1 '" + path + "'");

    SaeConfig config;
    if (!get_u32(in, config.input_dim) || !get_u32(in, config.latent_dim) ||
        !get_u32(in, config.top_k))
        fail(TG_ERR_TRUNCATED, "SAE1 '" + path + "': truncated header");
    validate_sae_config(config);

    SaeModel model;
    model.config = config;
    const auto get_array = [&in, &path](std::vector<double> &values, size_t count) {
        values.resize(count);
        for (size_t i = 0; i < count; ++i) {
            float v = 0.0f;
            if (!get_f32(in, v)) fail(TG_ERR_TRUNCATED, "SAE1 '" + path + "': truncated payload");
            if (!std::isfinite(v))
                fail(TG_ERR_NON_FINITE, "SAE1 '" + path + "': non-finite parameter");
            values[i] = static_cast<double>(v);
        }
    };
    const size_t d = config.input_dim, n = config.latent_dim;
    get_array(model.w_enc, n * d);
    get_array(model.b_enc, n);
    get_array(model.w_dec, d * n);
    get_array(model.b_pre, d);
    check_no_trailing(in, "SAE1 '" + path + "'");
    return model;
}

} // namespace tg
