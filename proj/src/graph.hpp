#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cluster.hpp"
#include "manifest.hpp"

namespace tg {

// Directed weighted graph over cluster vertices; the weight of (i, j) counts
// consecutive-token transitions from cluster i to cluster j in the reference
// corpus. Stored sparsely: an absent edge is weight 0.
class ClusterGraph {
public:
    ClusterGraph() = default;
    ClusterGraph(uint32_t num_clusters,
                 std::map<std::pair<uint32_t, uint32_t>, uint64_t> edges);

    uint32_t num_clusters() const { return num_clusters_; }
    uint64_t num_edges() const { return static_cast<uint64_t>(edges_.size()); }
    uint64_t total_transitions() const { return total_transitions_; }
    const std::map<std::pair<uint32_t, uint32_t>, uint64_t> &edges() const { return edges_; }

    uint64_t edge_weight(uint32_t src, uint32_t dst) const;

    // Successors of src with positive weight, sorted by destination id.
    std::span<const std::pair<uint32_t, uint64_t>> successors(uint32_t src) const;

private:
    uint32_t num_clusters_ = 0;
    uint64_t total_transitions_ = 0;
    std::map<std::pair<uint32_t, uint32_t>, uint64_t> edges_;
    std::vector<std::vector<std::pair<uint32_t, uint64_t>>> adjacency_;
};

// Counts consecutive pairs within each reference-tagged sequence; sequences
// tagged `other` contribute nothing and pairs never cross sequence bounds.
ClusterGraph build_graph(std::span<const AssignedSequence> assigned,
                         const SequenceManifest &manifest, uint32_t num_clusters);

// R(p): sum of traversed edge weights over the len-1 consecutive pairs.
uint64_t reward(const ClusterGraph &graph, const AssignedSequence &sequence);

// R(p) / N for an N-token sequence, N >= 1.
double per_token_reward(const ClusterGraph &graph, const AssignedSequence &sequence);

// CTG1: magic, version u32(=1), K u32, edge count u64, then
// (src u32, dst u32, weight u64) triples sorted by (src, dst).
void save_graph(const ClusterGraph &graph, const std::string &path);
ClusterGraph load_graph(const std::string &path);

// Tab-separated `src dst weight` rows sorted by (src, dst).
void export_graph_tsv(const ClusterGraph &graph, const std::string &path);
ClusterGraph import_graph_tsv(const std::string &path, uint32_t num_clusters);

} // namespace tg
