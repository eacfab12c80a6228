/* tracegraph — public C API.
 *
 * A pipeline that learns sparse token representations with a TopK sparse
 * autoencoder, clusters them with spherical k-means, builds a weighted
 * cluster-transition graph from a reference corpus, and uses that graph as a
 * reward model plus a metrics suite (entropy, DTW, KL divergence) for scoring
 * and analyzing token sequences.
 *
 * All functions returning int return TG_OK (0) on success or a tg_status
 * error code. A human-readable message for the most recent failure on the
 * calling thread is available via tg_last_error().
 */

#ifndef TRACEGRAPH_H
#define TRACEGRAPH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TG_BUILD_SHARED)
#define TG_API __declspec(dllexport)
#else
#define TG_API __declspec(dllimport)
#endif
#else
#define TG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define TG_VERSION_MAJOR 0
#define TG_VERSION_MINOR 1
#define TG_VERSION_PATCH 0

typedef enum tg_status {
    TG_OK = 0,
    TG_ERR_IO = 1,               /* file unreadable/unwritable */
    TG_ERR_BAD_MAGIC = 2,        /* file does not start with the expected magic */
    TG_ERR_BAD_VERSION = 3,      /* format version not supported */
    TG_ERR_TRUNCATED = 4,        /* payload shorter than the header declares */
    TG_ERR_TRAILING_DATA = 5,    /* payload longer than the header declares */
    TG_ERR_NON_FINITE = 6,       /* NaN or Inf where finite values are required */
    TG_ERR_INVALID_ARGUMENT = 7, /* precondition violated */
    TG_ERR_DIM_MISMATCH = 8,     /* artifact dimensions disagree (message names both) */
    TG_ERR_OUT_OF_RANGE = 9,     /* index or cluster id out of range */
    TG_ERR_PARSE = 10,           /* malformed text input (manifest, config, tsv) */
    TG_ERR_MISSING_INPUT = 11,   /* required artifact or label group absent */
    TG_ERR_NUMERIC = 12,         /* non-finite gradient or similar numeric failure */
    TG_ERR_INTERNAL = 13
} tg_status;

/* Name of a status code, e.g. "dim-mismatch". Never NULL. */
TG_API const char *tg_status_name(int status);

/* Message for the most recent error on this thread (empty string if none). */
TG_API const char *tg_last_error(void);

TG_API const char *tg_version_string(void);

/* ------------------------------------------------------------------ */
/* Opaque handles                                                      */
/* ------------------------------------------------------------------ */

typedef struct tg_store tg_store;         /* token embedding matrix (EMB1)   */
typedef struct tg_manifest tg_manifest;   /* sequence manifest (JSONL)       */
typedef struct tg_sae tg_sae;             /* TopK sparse autoencoder (SAE1)  */
typedef struct tg_centroids tg_centroids; /* spherical k-means model (KMC1)  */
typedef struct tg_graph tg_graph;         /* cluster-transition graph (CTG1) */
typedef struct tg_config tg_config;       /* pipeline run configuration      */

/* ------------------------------------------------------------------ */
/* Embedding store                                                     */
/* ------------------------------------------------------------------ */

TG_API int tg_store_open(const char *path, tg_store **out);
TG_API int tg_store_create(uint32_t dim, uint64_t num_tokens, const float *row_major_data,
                           tg_store **out);
TG_API int tg_store_save(const tg_store *store, const char *path);
TG_API uint32_t tg_store_dim(const tg_store *store);
TG_API uint64_t tg_store_num_tokens(const tg_store *store);
/* Copies row `index` into out_row (dim floats). */
TG_API int tg_store_row(const tg_store *store, uint64_t index, float *out_row);
TG_API void tg_store_free(tg_store *store);

/* ------------------------------------------------------------------ */
/* Sequence manifest                                                   */
/* ------------------------------------------------------------------ */

enum { TG_DATASET_REFERENCE = 0, TG_DATASET_OTHER = 1 };
enum { TG_LABEL_NONE = 0, TG_LABEL_CORRECT = 1, TG_LABEL_INCORRECT = 2 };

TG_API int tg_manifest_open(const char *path, tg_manifest **out);
TG_API int tg_manifest_save(const tg_manifest *manifest, const char *path);
TG_API size_t tg_manifest_size(const tg_manifest *manifest);
/* id of entry `i`; pointer valid until the manifest is freed. */
TG_API const char *tg_manifest_id(const tg_manifest *manifest, size_t i);
TG_API int tg_manifest_entry(const tg_manifest *manifest, size_t i, int *dataset, uint64_t *start,
                             uint64_t *len, int *label);
TG_API void tg_manifest_free(tg_manifest *manifest);

/* ------------------------------------------------------------------ */
/* Sparse autoencoder                                                  */
/* ------------------------------------------------------------------ */

TG_API int tg_sae_open(const char *path, tg_sae **out);
TG_API int tg_sae_save(const tg_sae *sae, const char *path);
TG_API void tg_sae_dims(const tg_sae *sae, uint32_t *input_dim, uint32_t *latent_dim,
                        uint32_t *top_k);
/* Encodes one token (input_dim floats) into at most top_k (index, value)
 * pairs sorted by index. cap is the capacity of both output arrays. */
TG_API int tg_sae_encode(const tg_sae *sae, const float *x, uint32_t *indices, float *values,
                         uint32_t cap, uint32_t *out_count);
/* Decodes (index, value) pairs back into input space (input_dim floats). */
TG_API int tg_sae_decode(const tg_sae *sae, const uint32_t *indices, const float *values,
                         uint32_t count, float *out_x);
TG_API void tg_sae_free(tg_sae *sae);

/* ------------------------------------------------------------------ */
/* Cluster centroids                                                   */
/* ------------------------------------------------------------------ */

TG_API int tg_centroids_open(const char *path, tg_centroids **out);
TG_API int tg_centroids_save(const tg_centroids *centroids, const char *path);
TG_API uint32_t tg_centroids_count(const tg_centroids *centroids);
TG_API uint32_t tg_centroids_dim(const tg_centroids *centroids);
TG_API double tg_centroids_inertia(const tg_centroids *centroids);
/* Assigns a sparse vector (pairs sorted by index) to its nearest centroid
 * by cosine distance; ties break toward the lower cluster id. */
TG_API int tg_centroids_assign(const tg_centroids *centroids, const uint32_t *indices,
                               const float *values, uint32_t count, uint32_t *out_cluster);
TG_API void tg_centroids_free(tg_centroids *centroids);

/* ------------------------------------------------------------------ */
/* Cluster-transition graph                                            */
/* ------------------------------------------------------------------ */

TG_API int tg_graph_open(const char *path, tg_graph **out);
TG_API int tg_graph_save(const tg_graph *graph, const char *path);
TG_API uint32_t tg_graph_num_clusters(const tg_graph *graph);
TG_API uint64_t tg_graph_num_edges(const tg_graph *graph);
TG_API uint64_t tg_graph_total_transitions(const tg_graph *graph);
TG_API int tg_graph_edge_weight(const tg_graph *graph, uint32_t src, uint32_t dst,
                                uint64_t *out_weight);
/* R(p): sum of traversed edge weights over the len-1 consecutive pairs. */
TG_API int tg_graph_reward(const tg_graph *graph, const uint32_t *clusters, size_t len,
                           uint64_t *out_reward);
/* R(p) / len. len must be >= 1. */
TG_API int tg_graph_per_token_reward(const tg_graph *graph, const uint32_t *clusters, size_t len,
                                     double *out_reward);
TG_API void tg_graph_free(tg_graph *graph);

/* ------------------------------------------------------------------ */
/* Pipeline configuration and stages                                   */
/* ------------------------------------------------------------------ */

TG_API int tg_config_default(tg_config **out);
TG_API int tg_config_load(const char *path, tg_config **out);
/* Overrides one field by dotted key, e.g. "sae.top_k", "cluster.num_clusters",
 * "policy.temperatures". The value is parsed as JSON when possible and as a
 * bare string otherwise. */
TG_API int tg_config_set(tg_config *config, const char *dotted_key, const char *value);
TG_API int tg_config_set_seed(tg_config *config, int64_t seed);
TG_API int tg_config_set_out_dir(tg_config *config, const char *dir);
/* Serialized JSON of the effective config; free with tg_string_free. */
TG_API int tg_config_dump(const tg_config *config, char **out_json);
TG_API void tg_config_free(tg_config *config);
TG_API void tg_string_free(char *s);

TG_API int tg_run_gen_synthetic(const tg_config *config);
TG_API int tg_run_train_sae(const tg_config *config);
TG_API int tg_run_cluster(const tg_config *config);
TG_API int tg_run_build_graph(const tg_config *config);
TG_API int tg_run_score(const tg_config *config);
TG_API int tg_run_metrics(const tg_config *config);
TG_API int tg_run_sweep(const tg_config *config);
TG_API int tg_run_export_graph(const tg_config *config);

#ifdef __cplusplus
}
#endif

#endif /* TRACEGRAPH_H */
