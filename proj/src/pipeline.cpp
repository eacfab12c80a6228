#include "pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "cluster.hpp"
#include "embedding_store.hpp"
#include "error.hpp"
#include "graph.hpp"
#include "manifest.hpp"
#include "metrics.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "sae.hpp"
#include "synthetic.hpp"

namespace tg {

namespace {

void ensure_parent_dir(const std::string &path) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
}

void check_dim(const char *stage, const char *what, uint64_t artifact_value,
               uint64_t config_value) {
    if (artifact_value != config_value)
        fail(TG_ERR_DIM_MISMATCH, std::string(stage) + ": artifact " + what + " = " +
                                      std::to_string(artifact_value) + " but the config says " +
                                      std::to_string(config_value));
}

SyntheticSpec spec_from_config(const RunConfig &config) {
    const auto &params = config.synthetic;
    SyntheticSpec spec = make_benchmark_spec(params.num_states, params.dim, params.noise_scale,
                                             params.dominant_p,
                                             derive_seed(config.seed, "synthetic"));
    if (params.transition) {
        if (params.transition->size() !=
            static_cast<size_t>(params.num_states) * params.num_states)
            fail(TG_ERR_INVALID_ARGUMENT,
                 "gen-synthetic: transition_matrix must have num_states^2 entries");
        spec.transition = *params.transition;
    }
    if (params.directions) {
        if (params.directions->size() != static_cast<size_t>(params.num_states) * params.dim)
            fail(TG_ERR_INVALID_ARGUMENT,
                 "gen-synthetic: emission_directions must have num_states*dim entries");
        spec.directions = *params.directions;
    }
    validate_spec(spec);
    return spec;
}

SaeConfig sae_config_for_store(const RunConfig &config, const EmbeddingStore &store) {
    SaeConfig sae = config.sae;
    if (sae.input_dim == 0) sae.input_dim = store.dim;
    check_dim("train-sae", "embedding dim", store.dim, sae.input_dim);
    sae.seed = derive_seed(config.seed, "sae");
    return sae;
}

// Loads the checkpoint and cross-checks its dims against the config and store.
SaeModel load_checked_sae(const char *stage, const RunConfig &config,
                          const EmbeddingStore &store) {
    SaeModel model = load_sae(config.sae_checkpoint());
    check_dim(stage, "sae input_dim", model.config.input_dim, store.dim);
    if (config.sae.input_dim != 0)
        check_dim(stage, "sae input_dim", model.config.input_dim, config.sae.input_dim);
    check_dim(stage, "sae latent_dim", model.config.latent_dim, config.sae.latent_dim);
    check_dim(stage, "sae top_k", model.config.top_k, config.sae.top_k);
    return model;
}

std::string group_key(const ManifestEntry &entry) {
    if (entry.dataset == Dataset::Reference) return "reference";
    if (entry.label == Label::Correct) return "other/correct";
    if (entry.label == Label::Incorrect) return "other/incorrect";
    return "other";
}

MetricParams metric_params(const RunConfig &config) {
    MetricParams params;
    params.bins = config.metrics.bins;
    params.epsilon = config.metrics.epsilon;
    if (config.metrics.dtw_subsample > 0)
        params.dtw_subsample = config.metrics.dtw_subsample;
    else
        params.dtw_subsample.reset();
    params.seed = derive_seed(config.seed, "metrics");
    params.dtw_cost = config.metrics.dtw_cost == "euclidean" ? DtwCost::Euclidean : DtwCost::Cosine;
    return params;
}

PolicyConfig policy_config(const RunConfig &config, const ClusterGraph &graph) {
    PolicyConfig policy;
    policy.max_len = config.policy.max_len;
    policy.num_trajectories = config.policy.num_trajectories;
    policy.seed = derive_seed(config.seed, "policy");
    if (config.policy.start == "sample-by-outdegree") {
        policy.start_cluster = kStartByOutdegree;
    } else {
        try {
            policy.start_cluster = static_cast<uint32_t>(std::stoul(config.policy.start));
        } catch (const std::exception &) {
            fail(TG_ERR_PARSE, "policy.start must be 'sample-by-outdegree' or a cluster id");
        }
        if (policy.start_cluster >= graph.num_clusters())
            fail(TG_ERR_OUT_OF_RANGE, "policy.start cluster " + config.policy.start +
                                          " outside K = " + std::to_string(graph.num_clusters()));
    }
    return policy;
}

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

} // namespace

void run_gen_synthetic(const RunConfig &config, std::ostream &log) {
    const SyntheticSpec base = spec_from_config(config);
    const auto &params = config.synthetic;
    const uint64_t stage_seed = derive_seed(config.seed, "synthetic");

    std::vector<SyntheticBatch> batches;
    if (params.num_reference > 0) {
        SyntheticSpec spec = base;
        spec.seed = derive_seed(stage_seed, "reference");
        batches.push_back(generate_synthetic(spec, params.num_reference, params.seq_len, "ref",
                                             Dataset::Reference));
    }
    if (params.num_correct > 0) {
        SyntheticSpec spec = base;
        spec.seed = derive_seed(stage_seed, "correct");
        batches.push_back(generate_synthetic(spec, params.num_correct, params.seq_len,
                                             "gen-correct", Dataset::Other, Label::Correct));
    }
    if (params.num_incorrect > 0) {
        SyntheticSpec spec = base;
        spec.seed = derive_seed(stage_seed, "incorrect");
        const auto incorrect_len = static_cast<uint64_t>(
            std::llround(static_cast<double>(params.seq_len) * params.incorrect_len_factor));
        batches.push_back(generate_stuttered(spec, params.num_incorrect,
                                             std::max<uint64_t>(incorrect_len, 1),
                                             params.stutter_prob, "gen-incorrect", Dataset::Other,
                                             Label::Incorrect));
    }
    if (params.num_random > 0) {
        SyntheticSpec spec = base;
        spec.seed = derive_seed(stage_seed, "random");
        batches.push_back(generate_uniform_random(spec, params.num_random, params.seq_len,
                                                  "random", Dataset::Other, std::nullopt));
    }
    if (batches.empty()) fail(TG_ERR_INVALID_ARGUMENT, "gen-synthetic: all group counts are zero");

    SyntheticBatch merged = merge_batches(std::move(batches));
    ensure_parent_dir(config.embeddings());
    ensure_parent_dir(config.manifest());
    ensure_parent_dir(config.true_states());
    write_embeddings(merged.store, config.embeddings());
    write_manifest(merged.manifest, config.manifest());
    write_true_states(merged, config.true_states());
    log << "[gen-synthetic] sequences=" << merged.manifest.entries.size()
        << " tokens=" << merged.store.num_tokens << " dim=" << merged.store.dim << "\n";
}

void run_train_sae(const RunConfig &config, std::ostream &log) {
    const EmbeddingStore store = read_embeddings(config.embeddings());
    const SaeConfig sae_config = sae_config_for_store(config, store);
    const SaeModel model = train(sae_config, store, [&log](uint32_t epoch, double loss) {
        log << "[train-sae] epoch=" << epoch << " loss=" << format_double(loss) << "\n";
    });
    ensure_parent_dir(config.sae_checkpoint());
    save_sae(model, config.sae_checkpoint());
    log << "[train-sae] wrote " << config.sae_checkpoint() << "\n";
}

void run_cluster(const RunConfig &config, std::ostream &log) {
    const EmbeddingStore store = read_embeddings(config.embeddings());
    const SequenceManifest manifest = read_manifest(config.manifest());
    validate_manifest(manifest, store.num_tokens);
    const SaeModel model = load_checked_sae("cluster", config, store);

    const auto sparse_sequences = extract_sparse(model, store, manifest);
    const uint64_t cluster_seed = derive_seed(config.seed, "cluster");
    const auto sample = sample_subset(sparse_sequences, config.cluster.sample_size, cluster_seed);
    log << "[cluster] sample=" << sample.size() << " K=" << config.cluster.num_clusters << "\n";

    const ClusterModel centroids =
        fit(sample, config.cluster.num_clusters, config.cluster.max_iters, config.cluster.tol,
            cluster_seed, [&log](uint32_t iteration, double objective) {
                log << "[cluster] iter=" << iteration
                    << " objective=" << format_double(objective) << "\n";
            });
    ensure_parent_dir(config.centroids());
    save_centroids(centroids, config.centroids());

    const auto assigned = assign_corpus(centroids, sparse_sequences, manifest);
    ensure_parent_dir(config.assignments());
    write_assignments(assigned, config.assignments());
    log << "[cluster] inertia=" << format_double(centroids.inertia) << " wrote "
        << config.centroids() << "\n";
}

void run_build_graph(const RunConfig &config, std::ostream &log) {
    const SequenceManifest manifest = read_manifest(config.manifest());
    const ClusterModel centroids = load_centroids(config.centroids());
    check_dim("build-graph", "centroid count K", centroids.num_clusters,
              config.cluster.num_clusters);
    const auto assigned = read_assignments(config.assignments());

    uint64_t reference_sequences = 0;
    for (const auto &entry : manifest.entries)
        if (entry.dataset == Dataset::Reference) ++reference_sequences;
    if (reference_sequences == 0)
        log << "[build-graph] warning: no reference sequences; the graph will be empty\n";

    const ClusterGraph graph = build_graph(assigned, manifest, centroids.num_clusters);
    ensure_parent_dir(config.graph());
    save_graph(graph, config.graph());
    log << "[build-graph] edges=" << graph.num_edges()
        << " transitions=" << graph.total_transitions() << " wrote " << config.graph() << "\n";
}

void run_score(const RunConfig &config, std::ostream &log) {
    const SequenceManifest manifest = read_manifest(config.manifest());
    const ClusterGraph graph = load_graph(config.graph());
    check_dim("score", "graph K", graph.num_clusters(), config.cluster.num_clusters);
    const auto assigned = read_assignments(config.assignments());
    if (assigned.size() != manifest.entries.size())
        fail(TG_ERR_INVALID_ARGUMENT, "score: assignments do not align with the manifest");

    struct GroupStats {
        uint64_t count = 0;
        double reward_sum = 0.0;
        double per_token_sum = 0.0;
    };
    std::map<std::string, GroupStats> groups;

    ensure_parent_dir(config.score());
    std::ofstream out(config.score(), std::ios::trunc);
    if (!out) fail(TG_ERR_IO, "cannot open for writing: " + config.score());
    out << "id\tdataset\tlabel\tlen\treward\tper_token_reward\n";
    for (size_t s = 0; s < assigned.size(); ++s) {
        const auto &entry = manifest.entries[s];
        const uint64_t sequence_reward = reward(graph, assigned[s]);
        const double per_token = per_token_reward(graph, assigned[s]);
        out << entry.id << '\t' << dataset_name(entry.dataset) << '\t'
            << (entry.label ? label_name(*entry.label) : "-") << '\t'
            << assigned[s].clusters.size() << '\t' << sequence_reward << '\t'
            << format_double(per_token) << '\n';
        auto &stats = groups[group_key(entry)];
        stats.count += 1;
        stats.reward_sum += static_cast<double>(sequence_reward);
        stats.per_token_sum += per_token;
    }
    out << "\ngroup\tcount\tmean_reward\tmean_per_token_reward\n";
    for (const auto &[key, stats] : groups) {
        out << key << '\t' << stats.count << '\t'
            << format_double(stats.reward_sum / static_cast<double>(stats.count)) << '\t'
            << format_double(stats.per_token_sum / static_cast<double>(stats.count)) << '\n';
    }
    out.flush();
    if (!out) fail(TG_ERR_IO, "score '" + config.score() + "': write failed");
    log << "[score] sequences=" << assigned.size() << " groups=" << groups.size() << " wrote "
        << config.score() << "\n";
}

void run_metrics(const RunConfig &config, std::ostream &log) {
    const EmbeddingStore store = read_embeddings(config.embeddings());
    const SequenceManifest manifest = read_manifest(config.manifest());
    validate_manifest(manifest, store.num_tokens);
    const SaeModel model = load_checked_sae("metrics", config, store);
    const ClusterModel centroids = load_centroids(config.centroids());
    check_dim("metrics", "centroid dim", centroids.dim, model.config.latent_dim);
    check_dim("metrics", "centroid count K", centroids.num_clusters, config.cluster.num_clusters);
    const auto assigned = read_assignments(config.assignments());

    const auto sparse_sequences = extract_sparse(model, store, manifest);
    const MetricReport report =
        full_report(assigned, sparse_sequences, centroids, manifest, metric_params(config));

    std::filesystem::create_directories(config.reports());
    const std::string report_path = config.reports() + "/report.txt";
    {
        std::ofstream out(report_path, std::ios::trunc);
        if (!out) fail(TG_ERR_IO, "cannot open for writing: " + report_path);
        out << render_report(report);
        out.flush();
        if (!out) fail(TG_ERR_IO, "report '" + report_path + "': write failed");
    }
    const auto dump_histogram = [&config](const std::optional<Histogram> &histogram,
                                          const char *name) {
        if (histogram) write_histogram_tsv(*histogram, config.reports() + "/" + name);
    };
    dump_histogram(report.hist_sae_original, "hist_sae_original.tsv");
    dump_histogram(report.hist_sae_correct, "hist_sae_correct.tsv");
    dump_histogram(report.hist_sae_incorrect, "hist_sae_incorrect.tsv");
    dump_histogram(report.hist_centroid_original, "hist_centroid_original.tsv");
    dump_histogram(report.hist_centroid_correct, "hist_centroid_correct.tsv");
    dump_histogram(report.hist_centroid_incorrect, "hist_centroid_incorrect.tsv");
    log << "[metrics] wrote " << report_path << "\n";
}

void run_sweep(const RunConfig &config, std::ostream &log) {
    const ClusterGraph graph = load_graph(config.graph());
    check_dim("sweep", "graph K", graph.num_clusters(), config.cluster.num_clusters);
    if (config.policy.temperatures.empty())
        fail(TG_ERR_INVALID_ARGUMENT, "sweep: policy.temperatures is empty");

    const auto rows = sweep(graph, config.policy.temperatures, policy_config(config, graph));
    ensure_parent_dir(config.sweep());
    std::ofstream out(config.sweep(), std::ios::trunc);
    if (!out) fail(TG_ERR_IO, "cannot open for writing: " + config.sweep());
    out << "tau\tmean_reward\tmean_per_token_reward\tentropy\n";
    for (const auto &row : rows) {
        out << format_double(row.temperature) << '\t' << format_double(row.mean_reward) << '\t'
            << format_double(row.mean_per_token_reward) << '\t'
            << format_double(row.cluster_entropy) << '\n';
    }
    out.flush();
    if (!out) fail(TG_ERR_IO, "sweep '" + config.sweep() + "': write failed");
    log << "[sweep] temperatures=" << rows.size() << " wrote " << config.sweep() << "\n";
}

void run_export_graph(const RunConfig &config, std::ostream &log) {
    const ClusterGraph graph = load_graph(config.graph());
    ensure_parent_dir(config.graph_tsv());
    export_graph_tsv(graph, config.graph_tsv());
    log << "[export-graph] edges=" << graph.num_edges() << " wrote " << config.graph_tsv()
        << "\n";
}

} // namespace tg
