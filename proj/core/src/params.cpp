#include "bhavnet/params.hpp"

#include "bhavnet/error.hpp"

namespace bhavnet {

ModelParams zero_params(const HyperParams& hp) {
  hp.validate();
  const std::size_t dp = hp.d_prime;
  const std::size_t f = hp.fused_dim;
  const std::size_t head = f / hp.H;
  const std::size_t fuse_in = (hp.single_space ? 2 : 4) * dp;

  ModelParams p;
  p.w_syn = Tensor({dp, hp.d});
  p.b_syn = Tensor({dp});
  if (!hp.single_space) {
    p.w_ant = Tensor({dp, hp.d});
    p.b_ant = Tensor({dp});
  }
  p.w_f = Tensor({f, fuse_in});
  p.b_f = Tensor({f});
  p.layers.resize(hp.L_layers);
  for (auto& layer : p.layers) {
    layer.heads.assign(hp.H, HeadParams<Tensor>{Tensor({head, f}), Tensor({head, f}), Tensor({head, f})});
    layer.w_o = Tensor({f, f});
  }
  p.w_1 = Tensor({hp.hidden, f});
  p.b_1 = Tensor({hp.hidden});
  p.w_2 = Tensor({1, hp.hidden});
  p.b_2 = Tensor({1});
  return p;
}

ModelParams init_params(const HyperParams& hp, Rng& rng) {
  ModelParams p = zero_params(hp);
  p.for_each([&](const std::string&, Tensor& t) {
    if (t.rank() == 2) t = xavier_init(t.rows(), t.cols(), rng);
  });
  return p;
}

ParamVars bind(Tape& tape, const ModelParams& params) {
  ParamVars v;
  v.w_syn = tape.leaf(params.w_syn);
  v.b_syn = tape.leaf(params.b_syn);
  if (params.w_ant) v.w_ant = tape.leaf(*params.w_ant);
  if (params.b_ant) v.b_ant = tape.leaf(*params.b_ant);
  v.w_f = tape.leaf(params.w_f);
  v.b_f = tape.leaf(params.b_f);
  for (const auto& layer : params.layers) {
    auto& lv = v.layers.emplace_back();
    for (const auto& h : layer.heads) lv.heads.push_back({tape.leaf(h.w_q), tape.leaf(h.w_k), tape.leaf(h.w_v)});
    lv.w_o = tape.leaf(layer.w_o);
  }
  v.w_1 = tape.leaf(params.w_1);
  v.b_1 = tape.leaf(params.b_1);
  v.w_2 = tape.leaf(params.w_2);
  v.b_2 = tape.leaf(params.b_2);
  return v;
}

ParamVars assemble(const ModelParams& like, const std::vector<Var>& vars) {
  Tape scratch;
  ParamVars out = bind(scratch, like);
  std::size_t i = 0;
  out.for_each([&](const std::string& name, Var& v) {
    if (i >= vars.size()) throw InvalidInput("assemble: no handle for '" + name + "'");
    v = vars[i++];
  });
  if (i != vars.size()) throw InvalidInput("assemble: too many handles");
  return out;
}

ModelParams gradients(const Tape& tape, const ParamVars& vars) {
  std::vector<Tensor> grads;
  vars.for_each([&](const std::string&, const Var& v) { grads.push_back(tape.grad(v)); });
  ModelParams like;
  like.w_syn = tape.value(vars.w_syn);
  like.b_syn = tape.value(vars.b_syn);
  if (vars.w_ant) like.w_ant = tape.value(*vars.w_ant);
  if (vars.b_ant) like.b_ant = tape.value(*vars.b_ant);
  like.w_f = tape.value(vars.w_f);
  like.b_f = tape.value(vars.b_f);
  for (const auto& layer : vars.layers) {
    auto& l = like.layers.emplace_back();
    for (const auto& h : layer.heads) l.heads.push_back({tape.value(h.w_q), tape.value(h.w_k), tape.value(h.w_v)});
    l.w_o = tape.value(layer.w_o);
  }
  like.w_1 = tape.value(vars.w_1);
  like.b_1 = tape.value(vars.b_1);
  like.w_2 = tape.value(vars.w_2);
  like.b_2 = tape.value(vars.b_2);
  return unflatten(like, grads);
}

std::vector<Tensor> flatten(const ModelParams& params) {
  std::vector<Tensor> out;
  params.for_each([&](const std::string&, const Tensor& t) { out.push_back(t); });
  return out;
}

ModelParams unflatten(const ModelParams& like, const std::vector<Tensor>& tensors) {
  ModelParams out = like;
  std::size_t i = 0;
  out.for_each([&](const std::string& name, Tensor& t) {
    if (i >= tensors.size()) throw DimensionError("unflatten: too few tensors");
    if (tensors[i].shape() != t.shape()) {
      throw DimensionError("unflatten: " + name + " expects " + shape_string(t.shape()) + ", got " +
                           shape_string(tensors[i].shape()));
    }
    t = tensors[i++];
  });
  if (i != tensors.size()) throw DimensionError("unflatten: too many tensors");
  return out;
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  params.for_each([&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

ModelParams quantized(const ModelParams& params) {
  ModelParams out = params;
  out.for_each([](const std::string&, Tensor& t) {
    for (double& v : t.data()) v = static_cast<double>(static_cast<float>(v));
  });
  return out;
}

}  // namespace bhavnet
