#pragma once

#include <optional>

#include "bhavnet/tensor.hpp"

namespace bhavnet {

// Per-pair intermediate values of the forward pass.
struct PairForward {
  Tensor s1, s2;                // synonym-space projections, width d_prime
  std::optional<Tensor> a1, a2;  // antonym-space projections; absent in single-space mode
  double sim_syn = 0.0;
  double sim_ant = 0.0;
  std::optional<Tensor> x_fused;
};

}  // namespace bhavnet
