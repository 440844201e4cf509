#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bhavnet/dataset.hpp"
#include "bhavnet/embeddings.hpp"
#include "bhavnet/grad_check.hpp"
#include "bhavnet/hyperparams.hpp"
#include "bhavnet/params.hpp"

namespace bhavnet {

struct SyntheticSpec {
  std::size_t dim = 32;
  std::size_t train = 400;
  std::size_t dev = 100;
  std::size_t test = 100;
  // Standard deviation of the per-coordinate perturbation.
  double noise = 0.1;
  std::uint64_t seed = 7;
  std::string language = "synthetic";
};

/// Separable relation task. Pair i draws v ~ N(0, I) and emits tokens
/// ("a<i>", "b<i>") with vectors v and v + e (synonym) or -v + e (antonym),
/// e ~ N(0, noise^2 I). Each split is exactly balanced and shuffled.
struct SyntheticTask {
  EmbeddingTable table;
  std::vector<LabeledPair> train;
  std::vector<LabeledPair> dev;
  std::vector<LabeledPair> test;
};

SyntheticTask make_synthetic_task(const SyntheticSpec& spec);

// d 8, d' 4, fused 8, H 2, one layer.
HyperParams tiny_hyperparams();

struct GradCheckFixture {
  HyperParams hp;
  EmbeddingTable table;
  std::vector<LabeledPair> batch;
  ModelParams params;
};

// Four synthetic pairs and freshly initialized parameters for hp.
GradCheckFixture make_grad_check_fixture(const HyperParams& hp, std::uint64_t seed);

// Eval-mode total loss of the batch, checked against central differences.
GradCheckResult check_model_gradients(const GradCheckFixture& fixture, double eps = 1e-5);

}  // namespace bhavnet
