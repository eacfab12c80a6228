#include "synthetic.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "error.hpp"
#include "rng.hpp"

namespace tg {

using nlohmann::json;

void validate_spec(const SyntheticSpec &spec) {
    const uint32_t s = spec.num_states;
    if (s == 0) fail(TG_ERR_INVALID_ARGUMENT, "synthetic spec: num_states must be > 0");
    if (spec.dim == 0) fail(TG_ERR_INVALID_ARGUMENT, "synthetic spec: dim must be > 0");
    if (spec.transition.size() != static_cast<size_t>(s) * s)
        fail(TG_ERR_INVALID_ARGUMENT, "synthetic spec: transition matrix must be num_states^2");
    if (spec.directions.size() != static_cast<size_t>(s) * spec.dim)
        fail(TG_ERR_INVALID_ARGUMENT,
             "synthetic spec: emission directions must be num_states x dim");
    if (spec.noise_scale < 0.0)
        fail(TG_ERR_INVALID_ARGUMENT, "synthetic spec: noise_scale must be >= 0");
    for (uint32_t i = 0; i < s; ++i) {
        double row_sum = 0.0;
        for (uint32_t j = 0; j < s; ++j) {
            const double p = spec.transition[static_cast<size_t>(i) * s + j];
            if (!(p >= 0.0))
                fail(TG_ERR_INVALID_ARGUMENT, "synthetic spec: negative transition probability");
            row_sum += p;
        }
        if (std::abs(row_sum - 1.0) > 1e-9)
            fail(TG_ERR_INVALID_ARGUMENT, "synthetic spec: transition row " + std::to_string(i) +
                                              " sums to " + std::to_string(row_sum));
        double norm_sq = 0.0;
        for (uint32_t c = 0; c < spec.dim; ++c) {
            const double v = spec.directions[static_cast<size_t>(i) * spec.dim + c];
            norm_sq += v * v;
        }
        if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-9)
            fail(TG_ERR_INVALID_ARGUMENT,
                 "synthetic spec: emission direction " + std::to_string(i) + " is not unit norm");
    }
}

namespace {

enum class StateMode { Chain, Uniform, Stuttered };

SyntheticBatch generate_impl(const SyntheticSpec &spec, uint64_t num_sequences, uint64_t seq_len,
                             const std::string &id_prefix, Dataset dataset,
                             std::optional<Label> label, StateMode mode, double stutter_prob) {
    validate_spec(spec);
    if (num_sequences == 0 || seq_len == 0)
        fail(TG_ERR_INVALID_ARGUMENT, "synthetic: num_sequences and seq_len must be > 0");

    const uint32_t s = spec.num_states;
    const uint32_t dim = spec.dim;
    Rng rng(spec.seed);

    SyntheticBatch batch;
    batch.store.dim = dim;
    batch.store.num_tokens = num_sequences * seq_len;
    batch.store.data.resize(batch.store.num_tokens * dim);
    batch.true_states.resize(num_sequences);

    uint64_t offset = 0;
    for (uint64_t seq = 0; seq < num_sequences; ++seq) {
        auto &states = batch.true_states[seq];
        states.resize(seq_len);
        for (uint64_t t = 0; t < seq_len; ++t) {
            uint32_t state;
            if (t == 0 || mode == StateMode::Uniform) {
                state = static_cast<uint32_t>(rng.uniform_below(s));
            } else if (mode == StateMode::Stuttered && rng.uniform() < stutter_prob) {
                state = states[t - 1];
            } else {
                const double *row = spec.transition.data() + static_cast<size_t>(states[t - 1]) * s;
                state = static_cast<uint32_t>(rng.discrete({row, s}));
            }
            states[t] = state;

            float *token = batch.store.data.data() + (offset + t) * dim;
            const double *direction = spec.directions.data() + static_cast<size_t>(state) * dim;
            if (spec.noise_scale == 0.0) {
                for (uint32_t c = 0; c < dim; ++c) token[c] = static_cast<float>(direction[c]);
            } else {
                for (uint32_t c = 0; c < dim; ++c)
                    token[c] = static_cast<float>(direction[c] + spec.noise_scale * rng.gaussian());
            }
        }
        ManifestEntry entry;
        entry.id = id_prefix + "-" + std::to_string(seq);
        entry.dataset = dataset;
        entry.start = offset;
        entry.len = seq_len;
        entry.label = label;
        batch.manifest.entries.push_back(std::move(entry));
        offset += seq_len;
    }
    return batch;
}

} // namespace

SyntheticBatch generate_synthetic(const SyntheticSpec &spec, uint64_t num_sequences,
                                  uint64_t seq_len, const std::string &id_prefix, Dataset dataset,
                                  std::optional<Label> label) {
    return generate_impl(spec, num_sequences, seq_len, id_prefix, dataset, label,
                         StateMode::Chain, 0.0);
}

SyntheticBatch generate_uniform_random(const SyntheticSpec &spec, uint64_t num_sequences,
                                       uint64_t seq_len, const std::string &id_prefix,
                                       Dataset dataset, std::optional<Label> label) {
    return generate_impl(spec, num_sequences, seq_len, id_prefix, dataset, label,
                         StateMode::Uniform, 0.0);
}

SyntheticBatch generate_stuttered(const SyntheticSpec &spec, uint64_t num_sequences,
                                  uint64_t seq_len, double stutter_prob,
                                  const std::string &id_prefix, Dataset dataset,
                                  std::optional<Label> label) {
    if (stutter_prob < 0.0 || stutter_prob > 1.0)
        fail(TG_ERR_INVALID_ARGUMENT, "synthetic: stutter_prob must be in [0, 1]");
    return generate_impl(spec, num_sequences, seq_len, id_prefix, dataset, label,
                         StateMode::Stuttered, stutter_prob);
}

SyntheticBatch merge_batches(std::vector<SyntheticBatch> batches) {
    if (batches.empty()) fail(TG_ERR_INVALID_ARGUMENT, "merge_batches: no batches");
    SyntheticBatch merged;
    merged.store.dim = batches.front().store.dim;

    std::unordered_set<std::string> seen_ids;
    for (auto &batch : batches) {
        if (batch.store.dim != merged.store.dim)
            fail(TG_ERR_DIM_MISMATCH, "merge_batches: store dims disagree (" +
                                          std::to_string(batch.store.dim) + " vs " +
                                          std::to_string(merged.store.dim) + ")");
        const uint64_t base = merged.store.num_tokens;
        merged.store.data.insert(merged.store.data.end(), batch.store.data.begin(),
                                 batch.store.data.end());
        merged.store.num_tokens += batch.store.num_tokens;
        for (auto &entry : batch.manifest.entries) {
            if (!seen_ids.insert(entry.id).second)
                fail(TG_ERR_INVALID_ARGUMENT, "merge_batches: duplicate id '" + entry.id + "'");
            entry.start += base;
            merged.manifest.entries.push_back(std::move(entry));
        }
        for (auto &states : batch.true_states) merged.true_states.push_back(std::move(states));
    }
    return merged;
}

SyntheticSpec make_benchmark_spec(uint32_t num_states, uint32_t dim, double noise_scale,
                                  double dominant_p, uint64_t seed) {
    if (num_states < 4) fail(TG_ERR_INVALID_ARGUMENT, "benchmark spec: need num_states >= 4");
    if (dominant_p <= 0.0 || dominant_p >= 1.0)
        fail(TG_ERR_INVALID_ARGUMENT, "benchmark spec: dominant_p must be in (0, 1)");

    SyntheticSpec spec;
    spec.num_states = num_states;
    spec.dim = dim;
    spec.noise_scale = noise_scale;
    spec.seed = seed;

    const uint32_t s = num_states;
    spec.transition.assign(static_cast<size_t>(s) * s, 0.0);
    const double rest = (1.0 - dominant_p) / static_cast<double>(s - 1);
    for (uint32_t i = 0; i < s; ++i) {
        // Dominant successor: the 3-cycle for states {0,1,2}, a drain path
        // into state 0 for everything else.
        const uint32_t next = i < 3 ? (i + 1) % 3 : (i + 1 < s ? i + 1 : 0);
        for (uint32_t j = 0; j < s; ++j)
            spec.transition[static_cast<size_t>(i) * s + j] = (j == next) ? dominant_p : rest;
    }

    Rng rng(derive_seed(seed, "benchmark-directions"));
    spec.directions.resize(static_cast<size_t>(s) * dim);
    for (uint32_t i = 0; i < s; ++i) {
        double *direction = spec.directions.data() + static_cast<size_t>(i) * dim;
        double norm_sq = 0.0;
        do {
            norm_sq = 0.0;
            for (uint32_t c = 0; c < dim; ++c) {
                direction[c] = rng.gaussian();
                norm_sq += direction[c] * direction[c];
            }
        } while (norm_sq < 1e-12);
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (uint32_t c = 0; c < dim; ++c) direction[c] *= inv;
    }
    return spec;
}

void write_true_states(const SyntheticBatch &batch, const std::string &path) {
    if (batch.true_states.size() != batch.manifest.entries.size())
        fail(TG_ERR_INVALID_ARGUMENT, "true states: count does not match manifest");
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(TG_ERR_IO, "cannot open for writing: " + path);
    for (size_t i = 0; i < batch.true_states.size(); ++i) {
        json record;
        record["id"] = batch.manifest.entries[i].id;
        record["states"] = batch.true_states[i];
        out << record.dump() << '\n';
    }
    out.flush();
    if (!out) fail(TG_ERR_IO, "true states '" + path + "': write failed");
}

std::vector<std::pair<std::string, std::vector<uint32_t>>>
read_true_states(const std::string &path) {
    std::ifstream in(path);
    if (!in) fail(TG_ERR_IO, "cannot open for reading: " + path);
    std::vector<std::pair<std::string, std::vector<uint32_t>>> result;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object())
            fail(TG_ERR_PARSE,
                 "true states '" + path + "' line " + std::to_string(line_no) + ": bad record");
        try {
            result.emplace_back(record.at("id").get<std::string>(),
                                record.at("states").get<std::vector<uint32_t>>());
        } catch (const json::exception &e) {
            fail(TG_ERR_PARSE,
                 "true states '" + path + "' line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return result;
}

} // namespace tg
