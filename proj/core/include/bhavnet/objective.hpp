#pragma once

#include <span>
#include <vector>

#include "bhavnet/autodiff.hpp"
#include "bhavnet/dataset.hpp"
#include "bhavnet/hyperparams.hpp"
#include "bhavnet/model.hpp"
#include "bhavnet/pair_forward.hpp"

namespace bhavnet {

inline constexpr double kProbabilityClamp = 1e-7;

struct LossBreakdown {
  double bce = 0.0;
  double margin = 0.0;
  double total = 0.0;
  std::vector<double> per_pair_bce;
  std::vector<double> per_pair_margin;
};

// -(1/N) sum [y ln p + (1-y) ln(1-p)], p clamped to [1e-7, 1-1e-7].
double bce_loss(std::span<const double> preds, std::span<const int> labels);

// Synonyms: max(0, m_syn - tanh(<s1,s2>)). Antonyms: max(0, tanh(<a1,a2>) - m_ant).
// Raw dot products, not cosines. Without an antonym space the antonym term is 0.
double margin_term(double dot_syn, double dot_ant, Relation label, double m_syn, double m_ant);
double margin_loss(const PairForward& pf, Relation label, double m_syn, double m_ant);

// bce + lambda * mean margin over the batch.
LossBreakdown total_loss(std::span<const double> preds, std::span<const LabeledPair> pairs,
                         std::span<const PairForward> forwards, const HyperParams& hp);

namespace ad {

Var bce_loss(Tape& t, Var probs, std::span<const int> labels);
// Mean margin over rows; dot_ant may be absent (single-space).
Var margin_loss(Tape& t, Var dot_syn, std::optional<Var> dot_ant, std::span<const int> labels, double m_syn,
                double m_ant);

struct LossVars {
  Var bce;
  Var margin;
  Var total;
};

LossVars total_loss(Tape& t, const BatchForward& f, std::span<const LabeledPair> batch, const HyperParams& hp);

}  // namespace ad

std::vector<int> labels_of(std::span<const LabeledPair> pairs);

}  // namespace bhavnet
