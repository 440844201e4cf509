#include "bhavnet/objective.hpp"

#include <algorithm>
#include <cmath>

#include "bhavnet/error.hpp"

namespace bhavnet {
namespace {

double clamp_probability(double p) { return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp); }

double bce_term(double p, int y) {
  const double pc = clamp_probability(p);
  return y == 1 ? -std::log(pc) : -std::log(1.0 - pc);
}

void check_labels(std::span<const int> labels) {
  for (int y : labels)
    if (y != 0 && y != 1) throw InvalidInput("labels must be 0 or 1");
}

}  // namespace

std::vector<int> labels_of(std::span<const LabeledPair> pairs) {
  std::vector<int> out;
  out.reserve(pairs.size());
  for (const LabeledPair& p : pairs) out.push_back(label_value(p.label));
  return out;
}

double bce_loss(std::span<const double> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw InvalidInput("bce_loss: " + std::to_string(preds.size()) + " predictions for " +
                       std::to_string(labels.size()) + " labels");
  }
  if (preds.empty()) throw InvalidInput("bce_loss: empty batch");
  check_labels(labels);
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) total += bce_term(preds[i], labels[i]);
  return total / static_cast<double>(preds.size());
}

double margin_term(double dot_syn, double dot_ant, Relation label, double m_syn, double m_ant) {
  if (label == Relation::synonym) return std::max(0.0, m_syn - std::tanh(dot_syn));
  return std::max(0.0, std::tanh(dot_ant) - m_ant);
}

double margin_loss(const PairForward& pf, Relation label, double m_syn, double m_ant) {
  if (label == Relation::antonym && !(pf.a1 && pf.a2)) return 0.0;
  const double ds = dot(pf.s1.data(), pf.s2.data());
  const double da = (pf.a1 && pf.a2) ? dot(pf.a1->data(), pf.a2->data()) : 0.0;
  return margin_term(ds, da, label, m_syn, m_ant);
}

LossBreakdown total_loss(std::span<const double> preds, std::span<const LabeledPair> pairs,
                         std::span<const PairForward> forwards, const HyperParams& hp) {
  if (preds.size() != pairs.size() || forwards.size() != pairs.size()) {
    throw InvalidInput("total_loss: predictions, pairs and forwards must align");
  }
  const std::vector<int> labels = labels_of(pairs);
  LossBreakdown out;
  out.bce = bce_loss(preds, labels);
  double margin_sum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.per_pair_bce.push_back(bce_term(preds[i], labels[i]));
    out.per_pair_margin.push_back(margin_loss(forwards[i], pairs[i].label, hp.m_syn, hp.m_ant));
    margin_sum += out.per_pair_margin.back();
  }
  out.margin = margin_sum / static_cast<double>(pairs.size());
  out.total = out.bce + hp.lambda_w * out.margin;
  return out;
}

namespace ad {

Var bce_loss(Tape& t, Var probs, std::span<const int> labels) {
  const Tensor& p = t.value(probs);
  const double value = bhavnet::bce_loss(p.data(), labels);
  std::vector<double> lower(p.size()), upper(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    lower[i] = p[i] - kProbabilityClamp;
    upper[i] = (1.0 - kProbabilityClamp) - p[i];
  }
  t.note_branches(lower);
  t.note_branches(upper);
  std::vector<int> y(labels.begin(), labels.end());
  return t.record(Tensor::vector({value}), {probs}, [probs, y](Tape& tp, const Tensor& g) {
    const Tensor& p = tp.value(probs);
    Tensor& gp = tp.grad_buffer(probs);
    const double inv_n = 1.0 / static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= kProbabilityClamp || p[i] >= 1.0 - kProbabilityClamp) continue;
      const double d = y[i] == 1 ? -1.0 / p[i] : 1.0 / (1.0 - p[i]);
      gp[i] += g[0] * d * inv_n;
    }
  });
}

Var margin_loss(Tape& t, Var dot_syn, std::optional<Var> dot_ant, std::span<const int> labels, double m_syn,
                double m_ant) {
  const Tensor& ds = t.value(dot_syn);
  const std::size_t n = ds.size();
  if (labels.size() != n || (dot_ant && t.value(*dot_ant).size() != n)) {
    throw InvalidInput("margin_loss: inputs do not align");
  }
  check_labels(labels);
  if (n == 0) throw InvalidInput("margin_loss: empty batch");

  // Hinge arguments for the selected term of each row; positive means active.
  std::vector<double> argument(n, -1.0);
  std::vector<double> slope(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 0) {
      const double th = std::tanh(ds[i]);
      argument[i] = m_syn - th;
      slope[i] = -(1.0 - th * th);
    } else if (dot_ant) {
      const double th = std::tanh(t.value(*dot_ant)[i]);
      argument[i] = th - m_ant;
      slope[i] = 1.0 - th * th;
    } else {
      continue;
    }
    total += std::max(0.0, argument[i]);
  }
  t.note_branches(argument);
  const double value = total / static_cast<double>(n);

  std::vector<int> y(labels.begin(), labels.end());
  std::vector<Var> inputs{dot_syn};
  if (dot_ant) inputs.push_back(*dot_ant);
  return t.record(Tensor::vector({value}), inputs, [dot_syn, dot_ant, y, argument, slope](Tape& tp, const Tensor& g) {
    const double inv_n = 1.0 / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (!(argument[i] > 0.0)) continue;
      const double d = g[0] * slope[i] * inv_n;
      if (y[i] == 0) {
        if (tp.requires_grad(dot_syn)) tp.grad_buffer(dot_syn)[i] += d;
      } else if (dot_ant && tp.requires_grad(*dot_ant)) {
        tp.grad_buffer(*dot_ant)[i] += d;
      }
    }
  });
}

LossVars total_loss(Tape& t, const BatchForward& f, std::span<const LabeledPair> batch, const HyperParams& hp) {
  const std::vector<int> labels = labels_of(batch);
  LossVars out;
  out.bce = bce_loss(t, f.probs, labels);
  const Var ds = row_dot(t, f.s1, f.s2);
  std::optional<Var> da;
  if (f.a1 && f.a2) da = row_dot(t, *f.a1, *f.a2);
  out.margin = margin_loss(t, ds, da, labels, hp.m_syn, hp.m_ant);
  out.total = add(t, out.bce, scale(t, out.margin, hp.lambda_w));
  return out;
}

}  // namespace ad
}  // namespace bhavnet
