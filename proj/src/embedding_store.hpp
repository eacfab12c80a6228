#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tg {

// Row-major matrix of token embeddings, float32 on disk (EMB1 format).
struct EmbeddingStore {
    uint32_t dim = 0;
    uint64_t num_tokens = 0;
    std::vector<float> data; // num_tokens * dim, row-major

    std::span<const float> row(uint64_t index) const {
        return {data.data() + index * dim, dim};
    }
    std::span<float> row(uint64_t index) {
        return {data.data() + index * dim, dim};
    }
};

// EMB1: magic 'EMB1', version u32(=1), dim u32, reserved u32(=0),
// num_tokens u64, then num_tokens*dim f32, row-major. All LE, no trailing bytes.
EmbeddingStore read_embeddings(const std::string &path);
void write_embeddings(const EmbeddingStore &store, const std::string &path);

// Rejects dim == 0 and non-finite entries.
void validate_store(const EmbeddingStore &store);

} // namespace tg
