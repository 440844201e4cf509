#include "bhavnet/hyperparams.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "bhavnet/error.hpp"

namespace bhavnet {
namespace {

using ordered_json = nlohmann::ordered_json;

template <class F>
void visit_fields(HyperParams& hp, F&& f) {
  f("d", hp.d);
  f("d_prime", hp.d_prime);
  f("fused_dim", hp.fused_dim);
  f("H", hp.H);
  f("L_layers", hp.L_layers);
  f("tau", hp.tau);
  f("lambda_w", hp.lambda_w);
  f("m_syn", hp.m_syn);
  f("m_ant", hp.m_ant);
  f("dropout_rate", hp.dropout_rate);
  f("lr", hp.lr);
  f("seed", hp.seed);
  f("hidden", hp.hidden);
  f("trans_weight", hp.trans_weight);
  f("batch_size", hp.batch_size);
  f("epochs", hp.epochs);
  f("patience", hp.patience);
  f("single_space", hp.single_space);
  f("no_graph", hp.no_graph);
}

template <class T>
void read_field(const ordered_json& j, const std::string& key, T& out) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      out = j.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!j.is_number_unsigned()) {
        throw ConfigError("config key '" + key + "' must be a non-negative integer");
      }
      out = j.get<T>();
    } else {
      if (!j.is_number()) throw ConfigError("config key '" + key + "' must be a number");
      out = j.get<T>();
    }
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

HyperParams HyperParams::resolved(std::size_t embedding_dim) const {
  HyperParams hp = *this;
  if (embedding_dim != 0) {
    if (hp.d != 0 && hp.d != embedding_dim) {
      throw ConfigError("d = " + std::to_string(hp.d) + " but embeddings have dimension " +
                        std::to_string(embedding_dim));
    }
    hp.d = embedding_dim;
  }
  if (hp.fused_dim == 0) hp.fused_dim = 2 * hp.d_prime;
  if (hp.hidden == 0) hp.hidden = std::max<std::size_t>(1, hp.fused_dim / 2);
  return hp;
}

void HyperParams::validate() const {
  require(d > 0, "d must be positive");
  require(d_prime > 0, "d_prime must be positive");
  require(fused_dim > 0, "fused_dim must be positive");
  require(H > 0, "H must be positive");
  require(fused_dim % H == 0, "fused_dim must be divisible by H");
  require(hidden > 0, "hidden must be positive");
  require(std::isfinite(tau) && tau >= 0.0, "tau must be finite and non-negative");
  require(std::isfinite(lambda_w) && lambda_w >= 0.0, "lambda_w must be finite and non-negative");
  require(std::isfinite(m_syn) && std::isfinite(m_ant) && m_ant < m_syn, "m_ant must be below m_syn");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout_rate must lie in [0, 1)");
  require(std::isfinite(lr) && lr >= 0.0, "lr must be finite and non-negative");
  require(trans_weight > 0.0 && trans_weight <= 1.0, "trans_weight must lie in (0, 1]");
  require(batch_size >= 2, "batch_size must be at least 2");
}

const std::vector<std::string>& hyperparam_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    HyperParams hp;
    visit_fields(hp, [&](const char* name, auto&) { k.emplace_back(name); });
    return k;
  }();
  return keys;
}

std::string to_json(const HyperParams& hp) {
  ordered_json j;
  HyperParams copy = hp;
  visit_fields(copy, [&](const char* name, auto& value) { j[name] = value; });
  return j.dump(2);
}

HyperParams hyperparams_from_json(std::string_view text, HyperParams base) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  const auto& keys = hyperparam_keys();
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(keys.begin(), keys.end(), it.key()) == keys.end()) {
      throw ConfigError("unknown config key '" + it.key() + "'");
    }
  }
  visit_fields(base, [&](const char* name, auto& value) {
    if (j.contains(name)) read_field(j.at(name), name, value);
  });
  return base;
}

HyperParams load_hyperparams(const std::filesystem::path& path, HyperParams base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return hyperparams_from_json(buf.str(), base);
}

void save_hyperparams(const HyperParams& hp, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << to_json(hp) << "\n";
}

}  // namespace bhavnet
