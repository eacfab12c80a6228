#include "embedding_store.hpp"

#include <cmath>

#include "error.hpp"
#include "io_util.hpp"

namespace tg {

namespace {
constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr uint32_t kVersion = 1;
} // namespace

void validate_store(const EmbeddingStore &store) {
    if (store.dim == 0) fail(TG_ERR_INVALID_ARGUMENT, "embedding store: dim must be > 0");
    if (store.data.size() != store.num_tokens * store.dim)
        fail(TG_ERR_INVALID_ARGUMENT, "embedding store: data size does not match dim*num_tokens");
    for (float v : store.data) {
        if (!std::isfinite(v))
            fail(TG_ERR_NON_FINITE, "embedding store: non-finite value in payload");
    }
}

EmbeddingStore read_embeddings(const std::string &path) {
    auto in = open_input(path);
    check_header(in, kMagic, kVersion, "EMB1 '" + path + "'");

    EmbeddingStore store;
    uint32_t reserved = 0;
    if (!get_u32(in, store.dim) || !get_u32(in, reserved) || !get_u64(in, store.num_tokens))
        fail(TG_ERR_TRUNCATED, "EMB1 '" + path + "': truncated header");
    if (store.dim == 0) fail(TG_ERR_PARSE, "EMB1 '" + path + "': dim must be > 0");
    if (reserved != 0) fail(TG_ERR_PARSE, "EMB1 '" + path + "': reserved field must be zero");

    store.data.resize(store.num_tokens * store.dim);
    if (!get_f32_array(in, store.data))
        fail(TG_ERR_TRUNCATED, "EMB1 '" + path + "': truncated payload");
    check_no_trailing(in, "EMB1 '" + path + "'");

    for (float v : store.data) {
        if (!std::isfinite(v))
            fail(TG_ERR_NON_FINITE, "EMB1 '" + path + "': non-finite value in payload");
    }
    return store;
}

void write_embeddings(const EmbeddingStore &store, const std::string &path) {
    validate_store(store);
    auto out = open_output(path);
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, store.dim);
    put_u32(out, 0); // reserved
    put_u64(out, store.num_tokens);
    put_f32_array(out, store.data);
    out.flush();
    if (!out) fail(TG_ERR_IO, "EMB1 '" + path + "': write failed");
}

} // namespace tg
