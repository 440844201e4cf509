#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bhavnet/dataset.hpp"
#include "bhavnet/pair_forward.hpp"
#include "bhavnet/tensor.hpp"

namespace bhavnet {

enum class EdgeRule : int { shared_word = 1, similarity = 2, transitive = 3 };

struct Edge {
  std::size_t src = 0;
  std::size_t dst = 0;
  double weight = 1.0;
  EdgeRule rule = EdgeRule::shared_word;

  bool operator==(const Edge&) const = default;
};

/// Batch-level graph over word pairs.
///
/// Nodes are batch positions. Edges are stored in both directions with equal
/// weight, sorted by (src, dst), and never include self-loops; attention adds
/// the self-loop itself.
struct PairGraph {
  std::size_t node_count = 0;
  std::vector<Edge> edges;
  std::optional<Tensor> node_features;

  // For each node, (neighbor, weight) in ascending neighbor order.
  std::vector<std::vector<std::pair<std::size_t, double>>> adjacency() const;
};

// Per-space node fingerprints: the mean of the pair's two projected vectors.
struct NodeFingerprints {
  std::vector<Tensor> syn;
  std::vector<Tensor> ant;  // empty when there is no antonym space
};

NodeFingerprints fingerprints(std::span<const PairForward> forwards);

/// Connects pairs that
///   1. share a surface token (weight 1),
///   2. have fingerprint cosine above tau in either space (weight 1),
///   3. are two hops apart through rule 1/2 edges with no direct edge
///      (weight trans_weight; single hop, applied once, no cascading).
/// Throws InvalidInput when forwards and batch are misaligned.
PairGraph build_graph(std::span<const LabeledPair> batch, std::span<const PairForward> forwards, double tau,
                      double trans_weight);
PairGraph build_graph(std::span<const LabeledPair> batch, const NodeFingerprints& prints, double tau,
                      double trans_weight);

struct GraphStats {
  std::size_t nodes = 0;
  // Undirected edge counts indexed by rule 1..3 (slot 0 unused).
  std::array<std::size_t, 4> edges_by_rule{};
  // degree -> number of nodes with that undirected degree
  std::map<std::size_t, std::size_t> degree_histogram;
  std::size_t components = 0;

  std::size_t edge_count() const { return edges_by_rule[1] + edges_by_rule[2] + edges_by_rule[3]; }
};

GraphStats graph_stats(const PairGraph& g);

// `src dst weight rule` per directed edge, then `# key value` footer lines.
std::string format_graph_dump(const PairGraph& g);

}  // namespace bhavnet
