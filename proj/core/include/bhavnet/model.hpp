#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "bhavnet/autodiff.hpp"
#include "bhavnet/dataset.hpp"
#include "bhavnet/embeddings.hpp"
#include "bhavnet/hyperparams.hpp"
#include "bhavnet/pair_forward.hpp"
#include "bhavnet/pair_graph.hpp"
#include "bhavnet/params.hpp"

namespace bhavnet {

enum class Mode { train, eval };

inline bool training(Mode m) noexcept { return m == Mode::train; }

// u.v / (|u||v|); 0 when either norm is below 1e-12.
double cosine(std::span<const double> u, std::span<const double> v);

// For each node: (neighbor, ln weight) over N(i) plus the self-loop (ln 1 = 0), ascending neighbor order.
using AttentionSets = std::vector<std::vector<std::pair<std::size_t, double>>>;
AttentionSets attention_sets(std::size_t node_count, std::span<const Edge> edges);

namespace ad {

/// Scaled dot-product attention restricted to each node's attention set.
///
///   e_ij = scale * q_i . k_j + ln w_ij,   alpha_i = softmax_j(e_i.),
///   out_i = sum_j alpha_ij v_j.
Var graph_attention(Tape& t, Var q, Var k, Var v, const AttentionSets& sets, double scale);

// One TransformerConv layer followed by ReLU and dropout.
Var transformer_conv(Tape& t, Var x, const AttentionSets& sets, const LayerParams<Var>& layer,
                     const HyperParams& hp, Mode mode, Rng& rng);

// dropout(relu(x W^T + b)) for each projection head.
Var project(Tape& t, Var h, Var w, Var b, const HyperParams& hp, Mode mode, Rng& rng);

// sigmoid(W_2 dropout(relu(W_1 x + b_1)) + b_2) per row -> n x 1 probabilities.
Var classify(Tape& t, Var x, const ParamVars& p, const HyperParams& hp, Mode mode, Rng& rng);

}  // namespace ad

// Tape handles for one batch's forward pass.
struct BatchForward {
  Var s1, s2;
  std::optional<Var> a1, a2;
  Var sim_syn, sim_ant;  // n-vectors
  Var fused;             // n x fused_dim
  Var node_features;     // after the transformer stack (== fused when it is skipped)
  Var probs;             // n x 1
  PairGraph graph;
};

/// Full batched forward: dual projection, cosine scores, fusion, pair
/// graph, L transformer layers and per-node classification. A single-pair
/// batch is mean-pooled before the classifier. Ablations follow
/// hp.single_space (no antonym head) and hp.no_graph (no transformer layers).
BatchForward forward_batch(Tape& t, const ParamVars& p, std::span<const LabeledPair> batch,
                           const EmbeddingTable& table, const HyperParams& hp, Mode mode, Rng& rng);

// Tape-free wrappers with plain values in and out.

PairForward project_dual(std::span<const double> h1, std::span<const double> h2, const ModelParams& p,
                         const HyperParams& hp, Mode mode, Rng& rng);
// W_f [s1; s2; a1; a2] + b_f (just [s1; s2] in single-space mode).
Tensor fuse(const PairForward& pf, const ModelParams& p);
Tensor transformer_conv_layer(const Tensor& x, std::span<const Edge> edges, const LayerParams<Tensor>& layer,
                              const HyperParams& hp, Mode mode, Rng& rng);
// Attention coefficients indexed [head][node][position in the node's attention set].
std::vector<std::vector<std::vector<double>>> attention_coefficients(const Tensor& x, std::span<const Edge> edges,
                                                                     const LayerParams<Tensor>& layer,
                                                                     const HyperParams& hp);
Tensor global_mean_pool(const Tensor& x);
double classify(std::span<const double> x, const ModelParams& p, const HyperParams& hp, Mode mode, Rng& rng);

struct BatchPrediction {
  std::vector<PairForward> pairs;
  std::vector<double> probs;
  Tensor node_features;
  PairGraph graph;
};

BatchPrediction predict_batch(std::span<const LabeledPair> batch, const EmbeddingTable& table, const ModelParams& p,
                              const HyperParams& hp, Mode mode, Rng& rng);

// Extracts per-pair values from a recorded forward.
std::vector<PairForward> pair_forwards(const Tape& t, const BatchForward& f);

}  // namespace bhavnet
