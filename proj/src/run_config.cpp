#include "run_config.hpp"

#include <fstream>
#include <set>

#include "error.hpp"

namespace tg {

using nlohmann::json;

namespace {

std::string joined(const std::string &dir, const char *name) {
    if (dir.empty()) return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

class Section {
public:
    Section(const json &object, std::string name) : object_(object), name_(std::move(name)) {
        if (!object_.is_object())
            fail(TG_ERR_PARSE, "config: section '" + name_ + "' must be an object");
        for (const auto &item : object_.items()) remaining_.insert(item.key());
    }

    template <typename T>
    void get(const char *key, T &target) {
        if (!object_.contains(key)) return;
        remaining_.erase(key);
        try {
            target = object_.at(key).get<T>();
        } catch (const json::exception &) {
            fail(TG_ERR_PARSE, "config: bad value for '" + name_ + "." + key + "'");
        }
    }

    template <typename T>
    void get_optional(const char *key, std::optional<T> &target) {
        if (!object_.contains(key)) return;
        remaining_.erase(key);
        try {
            target = object_.at(key).get<T>();
        } catch (const json::exception &) {
            fail(TG_ERR_PARSE, "config: bad value for '" + name_ + "." + key + "'");
        }
    }

    const json *sub(const char *key) {
        if (!object_.contains(key)) return nullptr;
        remaining_.erase(key);
        return &object_.at(key);
    }

    void done() const {
        if (!remaining_.empty())
            fail(TG_ERR_PARSE, "config: unknown key '" + name_ + "." + *remaining_.begin() + "'");
    }

private:
    const json &object_;
    std::string name_;
    std::set<std::string> remaining_;
};

} // namespace

std::string RunConfig::embeddings() const {
    return embeddings_path.empty() ? joined(out_dir, "embeddings.emb1") : embeddings_path;
}
std::string RunConfig::manifest() const {
    return manifest_path.empty() ? joined(out_dir, "manifest.jsonl") : manifest_path;
}
std::string RunConfig::true_states() const {
    return true_states_path.empty() ? joined(out_dir, "true_states.jsonl") : true_states_path;
}
std::string RunConfig::sae_checkpoint() const {
    return sae_path.empty() ? joined(out_dir, "sae.sae1") : sae_path;
}
std::string RunConfig::centroids() const {
    return centroids_path.empty() ? joined(out_dir, "centroids.kmc1") : centroids_path;
}
std::string RunConfig::assignments() const {
    return assignments_path.empty() ? joined(out_dir, "assignments.jsonl") : assignments_path;
}
std::string RunConfig::graph() const {
    return graph_path.empty() ? joined(out_dir, "graph.ctg1") : graph_path;
}
std::string RunConfig::graph_tsv() const {
    return graph_tsv_path.empty() ? joined(out_dir, "graph.tsv") : graph_tsv_path;
}
std::string RunConfig::score() const {
    return score_path.empty() ? joined(out_dir, "score.tsv") : score_path;
}
std::string RunConfig::sweep() const {
    return sweep_path.empty() ? joined(out_dir, "sweep.tsv") : sweep_path;
}
std::string RunConfig::reports() const {
    return report_dir.empty() ? joined(out_dir, "report") : report_dir;
}

RunConfig config_from_json(const json &root) {
    RunConfig config;
    Section top(root, "config");
    top.get("seed", config.seed);
    top.get("out_dir", config.out_dir);

    if (const json *paths = top.sub("paths")) {
        Section section(*paths, "paths");
        section.get("embeddings", config.embeddings_path);
        section.get("manifest", config.manifest_path);
        section.get("true_states", config.true_states_path);
        section.get("sae", config.sae_path);
        section.get("centroids", config.centroids_path);
        section.get("assignments", config.assignments_path);
        section.get("graph", config.graph_path);
        section.get("graph_tsv", config.graph_tsv_path);
        section.get("score", config.score_path);
        section.get("sweep", config.sweep_path);
        section.get("report_dir", config.report_dir);
        section.done();
    }
    if (const json *synthetic = top.sub("synthetic")) {
        Section section(*synthetic, "synthetic");
        section.get("num_states", config.synthetic.num_states);
        section.get("dim", config.synthetic.dim);
        section.get("noise_scale", config.synthetic.noise_scale);
        section.get("seq_len", config.synthetic.seq_len);
        section.get("num_reference", config.synthetic.num_reference);
        section.get("num_correct", config.synthetic.num_correct);
        section.get("num_incorrect", config.synthetic.num_incorrect);
        section.get("num_random", config.synthetic.num_random);
        section.get("stutter_prob", config.synthetic.stutter_prob);
        section.get("incorrect_len_factor", config.synthetic.incorrect_len_factor);
        section.get("dominant_p", config.synthetic.dominant_p);
        section.get_optional("transition_matrix", config.synthetic.transition);
        section.get_optional("emission_directions", config.synthetic.directions);
        section.done();
    }
    if (const json *sae = top.sub("sae")) {
        Section section(*sae, "sae");
        section.get("input_dim", config.sae.input_dim);
        section.get("latent_dim", config.sae.latent_dim);
        section.get("top_k", config.sae.top_k);
        section.get("learning_rate", config.sae.learning_rate);
        section.get("epochs", config.sae.epochs);
        section.get("batch_size", config.sae.batch_size);
        section.done();
    }
    if (const json *cluster = top.sub("cluster")) {
        Section section(*cluster, "cluster");
        section.get("num_clusters", config.cluster.num_clusters);
        section.get("max_iters", config.cluster.max_iters);
        section.get("tol", config.cluster.tol);
        section.get("sample_size", config.cluster.sample_size);
        section.done();
    }
    if (const json *metrics = top.sub("metrics")) {
        Section section(*metrics, "metrics");
        section.get("bins", config.metrics.bins);
        section.get("epsilon", config.metrics.epsilon);
        section.get("dtw_subsample", config.metrics.dtw_subsample);
        section.get("dtw_cost", config.metrics.dtw_cost);
        section.done();
    }
    if (const json *policy = top.sub("policy")) {
        Section section(*policy, "policy");
        section.get("temperatures", config.policy.temperatures);
        section.get("max_len", config.policy.max_len);
        section.get("num_trajectories", config.policy.num_trajectories);
        section.get("start", config.policy.start);
        section.done();
    }
    top.done();

    if (config.metrics.dtw_cost != "cosine" && config.metrics.dtw_cost != "euclidean")
        fail(TG_ERR_PARSE, "config: metrics.dtw_cost must be 'cosine' or 'euclidean'");
    return config;
}

json config_to_json(const RunConfig &config) {
    json root;
    root["seed"] = config.seed;
    root["out_dir"] = config.out_dir;
    json paths;
    if (!config.embeddings_path.empty()) paths["embeddings"] = config.embeddings_path;
    if (!config.manifest_path.empty()) paths["manifest"] = config.manifest_path;
    if (!config.true_states_path.empty()) paths["true_states"] = config.true_states_path;
    if (!config.sae_path.empty()) paths["sae"] = config.sae_path;
    if (!config.centroids_path.empty()) paths["centroids"] = config.centroids_path;
    if (!config.assignments_path.empty()) paths["assignments"] = config.assignments_path;
    if (!config.graph_path.empty()) paths["graph"] = config.graph_path;
    if (!config.graph_tsv_path.empty()) paths["graph_tsv"] = config.graph_tsv_path;
    if (!config.score_path.empty()) paths["score"] = config.score_path;
    if (!config.sweep_path.empty()) paths["sweep"] = config.sweep_path;
    if (!config.report_dir.empty()) paths["report_dir"] = config.report_dir;
    if (!paths.empty()) root["paths"] = paths;

    json synthetic;
    synthetic["num_states"] = config.synthetic.num_states;
    synthetic["dim"] = config.synthetic.dim;
    synthetic["noise_scale"] = config.synthetic.noise_scale;
    synthetic["seq_len"] = config.synthetic.seq_len;
    synthetic["num_reference"] = config.synthetic.num_reference;
    synthetic["num_correct"] = config.synthetic.num_correct;
    synthetic["num_incorrect"] = config.synthetic.num_incorrect;
    synthetic["num_random"] = config.synthetic.num_random;
    synthetic["stutter_prob"] = config.synthetic.stutter_prob;
    synthetic["incorrect_len_factor"] = config.synthetic.incorrect_len_factor;
    synthetic["dominant_p"] = config.synthetic.dominant_p;
    if (config.synthetic.transition) synthetic["transition_matrix"] = *config.synthetic.transition;
    if (config.synthetic.directions)
        synthetic["emission_directions"] = *config.synthetic.directions;
    root["synthetic"] = synthetic;

    json sae;
    sae["input_dim"] = config.sae.input_dim;
    sae["latent_dim"] = config.sae.latent_dim;
    sae["top_k"] = config.sae.top_k;
    sae["learning_rate"] = config.sae.learning_rate;
    sae["epochs"] = config.sae.epochs;
    sae["batch_size"] = config.sae.batch_size;
    root["sae"] = sae;

    json cluster;
    cluster["num_clusters"] = config.cluster.num_clusters;
    cluster["max_iters"] = config.cluster.max_iters;
    cluster["tol"] = config.cluster.tol;
    cluster["sample_size"] = config.cluster.sample_size;
    root["cluster"] = cluster;

    json metrics;
    metrics["bins"] = config.metrics.bins;
    metrics["epsilon"] = config.metrics.epsilon;
    metrics["dtw_subsample"] = config.metrics.dtw_subsample;
    metrics["dtw_cost"] = config.metrics.dtw_cost;
    root["metrics"] = metrics;

    json policy;
    policy["temperatures"] = config.policy.temperatures;
    policy["max_len"] = config.policy.max_len;
    policy["num_trajectories"] = config.policy.num_trajectories;
    policy["start"] = config.policy.start;
    root["policy"] = policy;
    return root;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) fail(TG_ERR_IO, "cannot open for reading: " + path);
    json root = json::parse(in, nullptr, false);
    if (root.is_discarded()) fail(TG_ERR_PARSE, "config '" + path + "': invalid JSON");
    return config_from_json(root);
}

} // namespace tg
