#pragma once

// Straight-line reference implementations used as test oracles. Nothing
// here calls into the library's math; only the data types are shared.

#include <cstddef>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "bhavnet/dataset.hpp"
#include "bhavnet/params.hpp"
#include "bhavnet/rng.hpp"
#include "bhavnet/tensor.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

Matrix to_matrix(const bhavnet::Tensor& t);
Matrix triple_loop_matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);

double cosine(const std::vector<double>& u, const std::vector<double>& v);

// W_f [s1; s2; a1; a2] + b_f, one multiply-add at a time.
std::vector<double> fuse(const std::vector<std::vector<double>>& parts, const Matrix& w_f, const std::vector<double>& b_f);

// Dense n x n attention with a -inf mask outside N(i) + {i}; eval mode.
// edges: (src, dst, weight); node dst attends to src.
Matrix masked_dense_attention_layer(const Matrix& x, const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges,
                                    const bhavnet::LayerParams<bhavnet::Tensor>& layer, std::size_t heads);

std::vector<double> column_means(const Matrix& x);

double bce(const std::vector<double>& preds, const std::vector<int>& labels);
double margin(double dot_syn, double dot_ant, int label, bool has_ant);

struct GraphEdge {
  double weight;
  int rule;
  bool operator==(const GraphEdge&) const = default;
};
using EdgeMap = std::map<std::pair<std::size_t, std::size_t>, GraphEdge>;

// Rule-by-rule application with explicit triple loops.
EdgeMap brute_force_graph(const std::vector<bhavnet::LabeledPair>& batch, const std::vector<std::vector<double>>& syn_prints,
                          const std::vector<std::vector<double>>& ant_prints, double tau, double trans_weight);

std::size_t bfs_components(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

struct Counts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};
Counts count_confusion(const std::vector<int>& predicted, const std::vector<int>& actual);
// Macro-F1 from counts, zero-denominator ratios taken as 0.
double macro_f1(const Counts& c);

// Random helpers.
bhavnet::Tensor random_tensor(bhavnet::Rng& rng, bhavnet::Tensor::Shape shape, double scale = 1.0);
std::vector<double> random_vector(bhavnet::Rng& rng, std::size_t n, double scale = 1.0);

}  // namespace oracle
