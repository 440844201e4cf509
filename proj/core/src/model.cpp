#include "bhavnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bhavnet/error.hpp"

namespace bhavnet {

double cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("cosine: widths " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
  const double nu = norm(u);
  const double nv = norm(v);
  if (nu < kCosineNormFloor || nv < kCosineNormFloor) return 0.0;
  return dot(u, v) / (nu * nv);
}

AttentionSets attention_sets(std::size_t node_count, std::span<const Edge> edges) {
  AttentionSets sets(node_count);
  for (std::size_t i = 0; i < node_count; ++i) sets[i].emplace_back(i, 0.0);
  for (const Edge& e : edges) {
    if (e.src >= node_count || e.dst >= node_count) {
      throw GraphError("edge " + std::to_string(e.src) + "->" + std::to_string(e.dst) + " references a node outside [0, " +
                       std::to_string(node_count) + ")");
    }
    if (e.src == e.dst) throw GraphError("self-edge on node " + std::to_string(e.src));
    if (!(e.weight > 0.0)) throw GraphError("edge weight must be positive");
    // Node i attends over its neighbors: incoming messages along dst <- src.
    sets[e.dst].emplace_back(e.src, std::log(e.weight));
  }
  for (auto& s : sets) std::sort(s.begin(), s.end());
  return sets;
}

namespace ad {

Var graph_attention(Tape& t, Var q, Var k, Var v, const AttentionSets& sets, double scale) {
  const Tensor& qv = t.value(q);
  const Tensor& kv = t.value(k);
  const Tensor& vv = t.value(v);
  const std::size_t n = qv.rows();
  if (kv.rows() != n || vv.rows() != n || sets.size() != n || kv.cols() != qv.cols()) {
    throw DimensionError("graph_attention: q " + shape_string(qv.shape()) + ", k " + shape_string(kv.shape()) +
                         ", v " + shape_string(vv.shape()) + ", " + std::to_string(sets.size()) + " nodes");
  }
  const std::size_t width = vv.cols();

  std::vector<std::vector<double>> alpha(n);
  Tensor out({n, width});
  for (std::size_t i = 0; i < n; ++i) {
    const auto& set = sets[i];
    auto& a = alpha[i];
    a.resize(set.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < set.size(); ++s) {
      a[s] = scale * dot(qv.row(i), kv.row(set[s].first)) + set[s].second;
      mx = std::max(mx, a[s]);
    }
    double total = 0.0;
    for (double& x : a) {
      x = std::exp(x - mx);
      total += x;
    }
    auto dst = out.row(i);
    for (std::size_t s = 0; s < set.size(); ++s) {
      a[s] /= total;
      auto src = vv.row(set[s].first);
      for (std::size_t c = 0; c < width; ++c) dst[c] += a[s] * src[c];
    }
  }

  return t.record(std::move(out), {q, k, v}, [q, k, v, sets, alpha = std::move(alpha), scale](Tape& tp, const Tensor& g) {
    const Tensor& qv = tp.value(q);
    const Tensor& kv = tp.value(k);
    const Tensor& vv = tp.value(v);
    const bool need_q = tp.requires_grad(q), need_k = tp.requires_grad(k), need_v = tp.requires_grad(v);
    Tensor dq = Tensor::zeros_like(qv), dk = Tensor::zeros_like(kv), dv = Tensor::zeros_like(vv);
    std::vector<double> dalpha;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const auto& set = sets[i];
      const auto& a = alpha[i];
      auto gi = g.row(i);
      dalpha.assign(set.size(), 0.0);
      double weighted = 0.0;
      for (std::size_t s = 0; s < set.size(); ++s) {
        const std::size_t j = set[s].first;
        dalpha[s] = dot(gi, vv.row(j));
        weighted += a[s] * dalpha[s];
        if (need_v) {
          auto dvj = dv.row(j);
          for (std::size_t c = 0; c < dvj.size(); ++c) dvj[c] += a[s] * gi[c];
        }
      }
      for (std::size_t s = 0; s < set.size(); ++s) {
        const std::size_t j = set[s].first;
        const double de = a[s] * (dalpha[s] - weighted) * scale;
        if (de == 0.0) continue;
        if (need_q) {
          auto dqi = dq.row(i);
          auto kj = kv.row(j);
          for (std::size_t c = 0; c < dqi.size(); ++c) dqi[c] += de * kj[c];
        }
        if (need_k) {
          auto dkj = dk.row(j);
          auto qi = qv.row(i);
          for (std::size_t c = 0; c < dkj.size(); ++c) dkj[c] += de * qi[c];
        }
      }
    }
    if (need_q) tp.accumulate(q, dq);
    if (need_k) tp.accumulate(k, dk);
    if (need_v) tp.accumulate(v, dv);
  });
}

Var transformer_conv(Tape& t, Var x, const AttentionSets& sets, const LayerParams<Var>& layer,
                     const HyperParams& hp, Mode mode, Rng& rng) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(hp.fused_dim / hp.H));
  std::vector<Var> heads;
  heads.reserve(layer.heads.size());
  for (const auto& h : layer.heads) {
    const Var q = matmul_nt(t, x, h.w_q);
    const Var k = matmul_nt(t, x, h.w_k);
    const Var v = matmul_nt(t, x, h.w_v);
    heads.push_back(graph_attention(t, q, k, v, sets, scale));
  }
  const Var merged = heads.size() == 1 ? heads.front() : concat(t, heads);
  const Var y = matmul_nt(t, merged, layer.w_o);
  return dropout(t, relu(t, y), hp.dropout_rate, training(mode), rng);
}

Var project(Tape& t, Var h, Var w, Var b, const HyperParams& hp, Mode mode, Rng& rng) {
  return dropout(t, relu(t, linear(t, h, w, b)), hp.dropout_rate, training(mode), rng);
}

Var classify(Tape& t, Var x, const ParamVars& p, const HyperParams& hp, Mode mode, Rng& rng) {
  const Var hidden = dropout(t, relu(t, linear(t, x, p.w_1, p.b_1)), hp.dropout_rate, training(mode), rng);
  return sigmoid(t, linear(t, hidden, p.w_2, p.b_2));
}

}  // namespace ad

namespace {

Tensor midpoint_rows(const Tensor& a, const Tensor& b, std::size_t r) {
  Tensor m({a.cols()});
  auto ar = a.row(r);
  auto br = b.row(r);
  for (std::size_t c = 0; c < m.size(); ++c) m[c] = 0.5 * (ar[c] + br[c]);
  return m;
}

LayerParams<Var> bind_layer(Tape& t, const LayerParams<Tensor>& layer) {
  LayerParams<Var> lv;
  for (const auto& h : layer.heads) lv.heads.push_back({t.leaf(h.w_q), t.leaf(h.w_k), t.leaf(h.w_v)});
  lv.w_o = t.leaf(layer.w_o);
  return lv;
}

Tensor row_of(const Tensor& m, std::size_t r) { return Tensor::vector(std::vector<double>(m.row(r).begin(), m.row(r).end())); }

}  // namespace

BatchForward forward_batch(Tape& t, const ParamVars& p, std::span<const LabeledPair> batch,
                           const EmbeddingTable& table, const HyperParams& hp, Mode mode, Rng& rng) {
  const std::size_t n = batch.size();
  if (n == 0) throw InvalidInput("forward_batch: empty batch");
  if (table.dim() != hp.d) {
    throw DimensionError("forward_batch: embeddings have dimension " + std::to_string(table.dim()) + ", model expects " +
                         std::to_string(hp.d));
  }
  if (hp.single_space == p.w_ant.has_value()) {
    throw ConfigError("forward_batch: parameters do not match the single_space setting");
  }

  Tensor h1({n, hp.d}), h2({n, hp.d});
  for (std::size_t i = 0; i < n; ++i) {
    const auto v1 = table.lookup(batch[i].w1);
    const auto v2 = table.lookup(batch[i].w2);
    std::copy(v1.begin(), v1.end(), h1.row(i).begin());
    std::copy(v2.begin(), v2.end(), h2.row(i).begin());
  }
  const Var e1 = t.constant(std::move(h1));
  const Var e2 = t.constant(std::move(h2));

  BatchForward f;
  f.s1 = ad::project(t, e1, p.w_syn, p.b_syn, hp, mode, rng);
  f.s2 = ad::project(t, e2, p.w_syn, p.b_syn, hp, mode, rng);
  std::vector<Var> parts{f.s1, f.s2};
  if (!hp.single_space) {
    f.a1 = ad::project(t, e1, *p.w_ant, *p.b_ant, hp, mode, rng);
    f.a2 = ad::project(t, e2, *p.w_ant, *p.b_ant, hp, mode, rng);
    parts.push_back(*f.a1);
    parts.push_back(*f.a2);
  }
  f.sim_syn = ad::row_cosine(t, f.s1, f.s2);
  f.sim_ant = f.a1 ? ad::row_cosine(t, *f.a1, *f.a2) : t.constant(Tensor({n}));
  f.fused = ad::linear(t, ad::concat(t, parts), p.w_f, p.b_f);

  Var x = f.fused;
  f.graph.node_count = n;
  if (!hp.no_graph) {
    NodeFingerprints prints;
    const Tensor& s1 = t.value(f.s1);
    const Tensor& s2 = t.value(f.s2);
    for (std::size_t i = 0; i < n; ++i) {
      prints.syn.push_back(midpoint_rows(s1, s2, i));
      if (f.a1) prints.ant.push_back(midpoint_rows(t.value(*f.a1), t.value(*f.a2), i));
    }
    f.graph = build_graph(batch, prints, hp.tau, hp.trans_weight);
    // Rule 2 depends on parameter values, so the edge set is a branch decision.
    for (const Edge& e : f.graph.edges) t.note_structure((e.src << 32) ^ (e.dst << 8) ^ static_cast<std::uint64_t>(e.rule));
    const AttentionSets sets = attention_sets(n, f.graph.edges);
    for (const auto& layer : p.layers) x = ad::transformer_conv(t, x, sets, layer, hp, mode, rng);
  }
  f.graph.node_features = t.value(f.fused);
  f.node_features = x;

  if (n == 1) x = ad::reshape(t, ad::mean_rows(t, x), {1, hp.fused_dim});
  f.probs = ad::classify(t, x, p, hp, mode, rng);
  return f;
}

std::vector<PairForward> pair_forwards(const Tape& t, const BatchForward& f) {
  const Tensor& s1 = t.value(f.s1);
  const Tensor& s2 = t.value(f.s2);
  const Tensor& fused = t.value(f.fused);
  const Tensor& ss = t.value(f.sim_syn);
  const Tensor& sa = t.value(f.sim_ant);
  std::vector<PairForward> out(s1.rows());
  for (std::size_t i = 0; i < out.size(); ++i) {
    PairForward& pf = out[i];
    pf.s1 = row_of(s1, i);
    pf.s2 = row_of(s2, i);
    if (f.a1) {
      pf.a1 = row_of(t.value(*f.a1), i);
      pf.a2 = row_of(t.value(*f.a2), i);
    }
    pf.sim_syn = ss[i];
    pf.sim_ant = sa[i];
    pf.x_fused = row_of(fused, i);
  }
  return out;
}

PairForward project_dual(std::span<const double> h1, std::span<const double> h2, const ModelParams& p,
                         const HyperParams& hp, Mode mode, Rng& rng) {
  if (h1.size() != p.w_syn.cols() || h2.size() != p.w_syn.cols()) {
    throw DimensionError("project_dual: input widths " + std::to_string(h1.size()) + "/" + std::to_string(h2.size()) +
                         ", expected " + std::to_string(p.w_syn.cols()));
  }
  Tape t;
  const Var e1 = t.constant(Tensor::matrix(1, h1.size(), {h1.begin(), h1.end()}));
  const Var e2 = t.constant(Tensor::matrix(1, h2.size(), {h2.begin(), h2.end()}));
  const Var w_syn = t.constant(p.w_syn), b_syn = t.constant(p.b_syn);
  PairForward pf;
  pf.s1 = t.value(ad::project(t, e1, w_syn, b_syn, hp, mode, rng)).reshaped({p.w_syn.rows()});
  pf.s2 = t.value(ad::project(t, e2, w_syn, b_syn, hp, mode, rng)).reshaped({p.w_syn.rows()});
  pf.sim_syn = cosine(pf.s1.data(), pf.s2.data());
  if (p.w_ant) {
    const Var w_ant = t.constant(*p.w_ant), b_ant = t.constant(*p.b_ant);
    pf.a1 = t.value(ad::project(t, e1, w_ant, b_ant, hp, mode, rng)).reshaped({p.w_ant->rows()});
    pf.a2 = t.value(ad::project(t, e2, w_ant, b_ant, hp, mode, rng)).reshaped({p.w_ant->rows()});
    pf.sim_ant = cosine(pf.a1->data(), pf.a2->data());
  }
  return pf;
}

Tensor fuse(const PairForward& pf, const ModelParams& p) {
  std::vector<Tensor> parts{pf.s1, pf.s2};
  if (pf.a1 && pf.a2) {
    parts.push_back(*pf.a1);
    parts.push_back(*pf.a2);
  }
  const Tensor cat = concat(parts);
  if (cat.size() != p.w_f.cols()) {
    throw DimensionError("fuse: concatenation has width " + std::to_string(cat.size()) + ", W_f expects " +
                         std::to_string(p.w_f.cols()));
  }
  Tensor out = matmul_nt(cat.reshaped({1, cat.size()}), p.w_f).reshaped({p.w_f.rows()});
  return add(out, p.b_f);
}

Tensor transformer_conv_layer(const Tensor& x, std::span<const Edge> edges, const LayerParams<Tensor>& layer,
                              const HyperParams& hp, Mode mode, Rng& rng) {
  const AttentionSets sets = attention_sets(x.rows(), edges);
  Tape t;
  const Var xv = t.constant(x);
  const LayerParams<Var> lv = bind_layer(t, layer);
  return t.value(ad::transformer_conv(t, xv, sets, lv, hp, mode, rng));
}

std::vector<std::vector<std::vector<double>>> attention_coefficients(const Tensor& x, std::span<const Edge> edges,
                                                                     const LayerParams<Tensor>& layer,
                                                                     const HyperParams& hp) {
  const AttentionSets sets = attention_sets(x.rows(), edges);
  const double scale = 1.0 / std::sqrt(static_cast<double>(hp.fused_dim / hp.H));
  std::vector<std::vector<std::vector<double>>> out;
  for (const auto& h : layer.heads) {
    const Tensor q = matmul_nt(x, h.w_q);
    const Tensor k = matmul_nt(x, h.w_k);
    auto& per_node = out.emplace_back(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
      std::vector<double> logits;
      for (const auto& [j, bias] : sets[i]) logits.push_back(scale * dot(q.row(i), k.row(j)) + bias);
      per_node[i] = softmax(Tensor::vector(logits)).values();
    }
  }
  return out;
}

Tensor global_mean_pool(const Tensor& x) {
  if (x.rank() != 2 || x.rows() == 0) throw InvalidInput("global_mean_pool: graph has no nodes");
  return mean_rows(x);
}

double classify(std::span<const double> x, const ModelParams& p, const HyperParams& hp, Mode mode, Rng& rng) {
  if (x.size() != p.w_1.cols()) {
    throw DimensionError("classify: input width " + std::to_string(x.size()) + ", expected " +
                         std::to_string(p.w_1.cols()));
  }
  Tape t;
  ParamVars pv;
  pv.w_1 = t.constant(p.w_1);
  pv.b_1 = t.constant(p.b_1);
  pv.w_2 = t.constant(p.w_2);
  pv.b_2 = t.constant(p.b_2);
  const Var xv = t.constant(Tensor::matrix(1, x.size(), {x.begin(), x.end()}));
  return t.value(ad::classify(t, xv, pv, hp, mode, rng))[0];
}

BatchPrediction predict_batch(std::span<const LabeledPair> batch, const EmbeddingTable& table, const ModelParams& p,
                              const HyperParams& hp, Mode mode, Rng& rng) {
  Tape t;
  const ParamVars pv = bind(t, p);
  BatchForward f = forward_batch(t, pv, batch, table, hp, mode, rng);
  BatchPrediction out;
  out.pairs = pair_forwards(t, f);
  out.probs = t.value(f.probs).values();
  out.node_features = t.value(f.node_features);
  out.graph = std::move(f.graph);
  return out;
}

}  // namespace bhavnet
