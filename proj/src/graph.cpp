#include "graph.hpp"

#include <fstream>
#include <sstream>
#include <unordered_map>

#include "error.hpp"
#include "io_util.hpp"

namespace tg {

namespace {
constexpr char kMagic[4] = {'C', 'T', 'G', '1'};
constexpr uint32_t kVersion = 1;
} // namespace

ClusterGraph::ClusterGraph(uint32_t num_clusters,
                           std::map<std::pair<uint32_t, uint32_t>, uint64_t> edges)
    : num_clusters_(num_clusters), edges_(std::move(edges)) {
    adjacency_.resize(num_clusters_);
    for (const auto &[key, weight] : edges_) {
        const auto [src, dst] = key;
        if (src >= num_clusters_ || dst >= num_clusters_)
            fail(TG_ERR_OUT_OF_RANGE, "graph: edge (" + std::to_string(src) + ", " +
                                          std::to_string(dst) + ") outside K = " +
                                          std::to_string(num_clusters_));
        if (weight == 0)
            fail(TG_ERR_INVALID_ARGUMENT, "graph: stored edges must have positive weight");
        total_transitions_ += weight;
        adjacency_[src].emplace_back(dst, weight); // map order keeps dst ascending
    }
}

uint64_t ClusterGraph::edge_weight(uint32_t src, uint32_t dst) const {
    if (src >= num_clusters_ || dst >= num_clusters_)
        fail(TG_ERR_OUT_OF_RANGE, "edge_weight: (" + std::to_string(src) + ", " +
                                      std::to_string(dst) + ") outside K = " +
                                      std::to_string(num_clusters_));
    const auto it = edges_.find({src, dst});
    return it == edges_.end() ? 0 : it->second;
}

std::span<const std::pair<uint32_t, uint64_t>> ClusterGraph::successors(uint32_t src) const {
    if (src >= num_clusters_)
        fail(TG_ERR_OUT_OF_RANGE,
             "successors: cluster " + std::to_string(src) + " outside K = " +
                 std::to_string(num_clusters_));
    return adjacency_[src];
}

ClusterGraph build_graph(std::span<const AssignedSequence> assigned,
                         const SequenceManifest &manifest, uint32_t num_clusters) {
    std::unordered_map<std::string, Dataset> dataset_of;
    dataset_of.reserve(manifest.entries.size());
    for (const auto &entry : manifest.entries) dataset_of[entry.id] = entry.dataset;

    std::map<std::pair<uint32_t, uint32_t>, uint64_t> edges;
    for (const auto &sequence : assigned) {
        const auto it = dataset_of.find(sequence.id);
        if (it == dataset_of.end())
            fail(TG_ERR_MISSING_INPUT,
                 "build_graph: sequence '" + sequence.id + "' not in the manifest");
        if (it->second != Dataset::Reference) continue;
        for (uint32_t c : sequence.clusters) {
            if (c >= num_clusters)
                fail(TG_ERR_OUT_OF_RANGE, "build_graph: sequence '" + sequence.id +
                                              "' has cluster id " + std::to_string(c) +
                                              " outside K = " + std::to_string(num_clusters));
        }
        for (size_t t = 0; t + 1 < sequence.clusters.size(); ++t)
            edges[{sequence.clusters[t], sequence.clusters[t + 1]}] += 1;
    }
    return ClusterGraph(num_clusters, std::move(edges));
}

uint64_t reward(const ClusterGraph &graph, const AssignedSequence &sequence) {
    uint64_t total = 0;
    for (size_t t = 0; t + 1 < sequence.clusters.size(); ++t)
        total += graph.edge_weight(sequence.clusters[t], sequence.clusters[t + 1]);
    return total;
}

double per_token_reward(const ClusterGraph &graph, const AssignedSequence &sequence) {
    if (sequence.clusters.empty())
        fail(TG_ERR_INVALID_ARGUMENT, "per_token_reward: empty sequence");
    return static_cast<double>(reward(graph, sequence)) /
           static_cast<double>(sequence.clusters.size());
}

void save_graph(const ClusterGraph &graph, const std::string &path) {
    auto out = open_output(path);
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, graph.num_clusters());
    put_u64(out, graph.num_edges());
    for (const auto &[key, weight] : graph.edges()) {
        put_u32(out, key.first);
        put_u32(out, key.second);
        put_u64(out, weight);
    }
    out.flush();
    if (!out) fail(TG_ERR_IO, "CTG1 '" + path + "': write failed");
}

ClusterGraph load_graph(const std::string &path) {
    auto in = open_input(path);
    check_header(in, kMagic, kVersion, "CTG1 '" + path + "'");
    uint32_t num_clusters = 0;
    uint64_t num_edges = 0;
    if (!get_u32(in, num_clusters) || !get_u64(in, num_edges))
        fail(TG_ERR_TRUNCATED, "CTG1 '" + path + "': truncated header");

    std::map<std::pair<uint32_t, uint32_t>, uint64_t> edges;
    std::pair<uint32_t, uint32_t> last{0, 0};
    bool first = true;
    for (uint64_t e = 0; e < num_edges; ++e) {
        uint32_t src = 0, dst = 0;
        uint64_t weight = 0;
        if (!get_u32(in, src) || !get_u32(in, dst) || !get_u64(in, weight))
            fail(TG_ERR_TRUNCATED, "CTG1 '" + path + "': truncated edge list");
        const std::pair<uint32_t, uint32_t> key{src, dst};
        if (!first && key <= last)
            fail(TG_ERR_PARSE, "CTG1 '" + path + "': edges not strictly sorted by (src, dst)");
        if (weight == 0) fail(TG_ERR_PARSE, "CTG1 '" + path + "': zero-weight edge stored");
        edges.emplace(key, weight);
        last = key;
        first = false;
    }
    check_no_trailing(in, "CTG1 '" + path + "'");
    return ClusterGraph(num_clusters, std::move(edges));
}

void export_graph_tsv(const ClusterGraph &graph, const std::string &path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(TG_ERR_IO, "cannot open for writing: " + path);
    out << "src\tdst\tweight\n";
    for (const auto &[key, weight] : graph.edges())
        out << key.first << '\t' << key.second << '\t' << weight << '\n';
    out.flush();
    if (!out) fail(TG_ERR_IO, "graph tsv '" + path + "': write failed");
}

ClusterGraph import_graph_tsv(const std::string &path, uint32_t num_clusters) {
    std::ifstream in(path);
    if (!in) fail(TG_ERR_IO, "cannot open for reading: " + path);
    std::map<std::pair<uint32_t, uint32_t>, uint64_t> edges;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "src\tdst\tweight") continue;
        std::istringstream row(line);
        uint32_t src = 0, dst = 0;
        uint64_t weight = 0;
        if (!(row >> src >> dst >> weight))
            fail(TG_ERR_PARSE, "graph tsv '" + path + "' line " + std::to_string(line_no) +
                                   ": expected 'src dst weight'");
        edges[{src, dst}] += weight;
    }
    return ClusterGraph(num_clusters, std::move(edges));
}

} // namespace tg
