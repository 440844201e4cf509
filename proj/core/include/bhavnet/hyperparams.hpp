#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace bhavnet {

/// Every knob of the architecture, objective and training loop.
///
/// Field names double as config-file keys. Defaults: d_prime 128,
/// fused_dim 2*d_prime, H 4, L_layers 2, dropout 0.1, tau 0.9, lambda 1,
/// lr 1e-2, margins 0.8 / 0.2, hidden fused_dim/2, batch 32, 100 epochs,
/// patience 10. A zero in d, fused_dim or hidden means "derive": d from the
/// embedding table, the others from the rule above.
struct HyperParams {
  std::size_t d = 0;
  std::size_t d_prime = 128;
  std::size_t fused_dim = 0;
  std::size_t H = 4;
  std::size_t L_layers = 2;
  double tau = 0.9;
  double lambda_w = 1.0;
  double m_syn = 0.8;
  double m_ant = 0.2;
  double dropout_rate = 0.1;
  double lr = 1e-2;
  std::uint64_t seed = 42;

  std::size_t hidden = 0;
  double trans_weight = 0.5;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  // Epochs without dev macro-F1 improvement before stopping; 0 disables.
  std::size_t patience = 10;
  bool single_space = false;
  bool no_graph = false;

  bool operator==(const HyperParams&) const = default;

  // Fills derived widths. d must be known (nonzero) or supplied.
  HyperParams resolved(std::size_t embedding_dim = 0) const;
  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Config keys in declaration order.
const std::vector<std::string>& hyperparam_keys();

std::string to_json(const HyperParams& hp);
// Keys absent from the text keep their defaults; unknown keys are a ConfigError.
HyperParams hyperparams_from_json(std::string_view text, HyperParams base = {});
HyperParams load_hyperparams(const std::filesystem::path& path, HyperParams base = {});
void save_hyperparams(const HyperParams& hp, const std::filesystem::path& path);

}  // namespace bhavnet
