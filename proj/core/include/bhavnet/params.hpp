#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bhavnet/autodiff.hpp"
#include "bhavnet/hyperparams.hpp"
#include "bhavnet/rng.hpp"
#include "bhavnet/tensor.hpp"

namespace bhavnet {

template <class T>
struct HeadParams {
  T w_q, w_k, w_v;  // each (fused_dim/H) x fused_dim
};

template <class T>
struct LayerParams {
  std::vector<HeadParams<T>> heads;
  T w_o;  // fused_dim x fused_dim
};

/// All trainable arrays, generic over the element so the same layout holds
/// tensors (ModelParams) or tape handles (ParamVars).
///
/// The antonym head is absent in the single-space variant. Weight matrices
/// are stored out x in.
template <class T>
struct ParamSet {
  T w_syn, b_syn;
  std::optional<T> w_ant, b_ant;
  T w_f, b_f;
  std::vector<LayerParams<T>> layers;
  T w_1, b_1, w_2, b_2;

  // Calls f(name, T&) for every array in a fixed order.
  template <class F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <class F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

 private:
  template <class Self, class F>
  static void visit(Self& self, F& f) {
    f(std::string("w_syn"), self.w_syn);
    f(std::string("b_syn"), self.b_syn);
    if (self.w_ant) f(std::string("w_ant"), *self.w_ant);
    if (self.b_ant) f(std::string("b_ant"), *self.b_ant);
    f(std::string("w_f"), self.w_f);
    f(std::string("b_f"), self.b_f);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      auto& layer = self.layers[l];
      const std::string prefix = "layer" + std::to_string(l) + ".";
      for (std::size_t h = 0; h < layer.heads.size(); ++h) {
        const std::string hp = prefix + "head" + std::to_string(h) + ".";
        f(hp + "w_q", layer.heads[h].w_q);
        f(hp + "w_k", layer.heads[h].w_k);
        f(hp + "w_v", layer.heads[h].w_v);
      }
      f(prefix + "w_o", layer.w_o);
    }
    f(std::string("w_1"), self.w_1);
    f(std::string("b_1"), self.b_1);
    f(std::string("w_2"), self.w_2);
    f(std::string("b_2"), self.b_2);
  }
};

using ModelParams = ParamSet<Tensor>;
using ParamVars = ParamSet<Var>;

// Shapes implied by resolved hyperparameters, in for_each order.
ModelParams zero_params(const HyperParams& hp);
// Xavier-uniform weights, zero biases.
ModelParams init_params(const HyperParams& hp, Rng& rng);

// Binds every array as a tape leaf.
ParamVars bind(Tape& tape, const ModelParams& params);
// Rebuilds the layout of `like` from handles given in for_each order.
ParamVars assemble(const ModelParams& like, const std::vector<Var>& vars);
// Collects the adjoints of bound leaves into the same layout.
ModelParams gradients(const Tape& tape, const ParamVars& vars);

std::vector<Tensor> flatten(const ModelParams& params);
// Inverse of flatten for a layout taken from `like`.
ModelParams unflatten(const ModelParams& like, const std::vector<Tensor>& tensors);
std::size_t parameter_count(const ModelParams& params);
// Rounds every entry through 32-bit float, the checkpoint storage precision.
ModelParams quantized(const ModelParams& params);

}  // namespace bhavnet
