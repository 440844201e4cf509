#include "bhavnet/metrics.hpp"

#include <cstdio>

#include "bhavnet/error.hpp"

namespace bhavnet {
namespace {

double safe_ratio(std::size_t num, std::size_t den, std::size_t& zero_division) {
  if (den == 0) {
    ++zero_division;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t hit, std::size_t false_pos, std::size_t false_neg, std::size_t& zero_division) {
  ClassMetrics m;
  m.precision = safe_ratio(hit, hit + false_pos, zero_division);
  m.recall = safe_ratio(hit, hit + false_neg, zero_division);
  if (m.precision + m.recall == 0.0) {
    ++zero_division;
    m.f1 = 0.0;
  } else {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  m.support = hit + false_neg;
  return m;
}

}  // namespace

void ConfusionCounts::add(int predicted, int actual) {
  if ((predicted != 0 && predicted != 1) || (actual != 0 && actual != 1)) {
    throw InvalidInput("confusion counts take labels 0 or 1");
  }
  if (predicted == 1) {
    ++(actual == 1 ? tp : fp);
  } else {
    ++(actual == 0 ? tn : fn);
  }
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  tn += o.tn;
  fn += o.fn;
  return *this;
}

EvalReport report_from_counts(const ConfusionCounts& c) {
  if (c.total() == 0) throw InvalidInput("cannot score an empty evaluation set");
  EvalReport r;
  r.counts = c;
  // For the synonym class the roles of the cells swap: TN are its hits.
  r.per_class[0] = class_metrics(c.tn, c.fn, c.fp, r.zero_division);
  r.per_class[1] = class_metrics(c.tp, c.fp, c.fn, r.zero_division);
  r.macro_f1 = 0.5 * (r.per_class[0].f1 + r.per_class[1].f1);
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return r;
}

EvalReport score(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) throw InvalidInput("score: predictions and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) c.add(predicted[i], actual[i]);
  return report_from_counts(c);
}

std::string format_report(const EvalReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "macro_f1 %.6f\naccuracy %.6f\n"
                "class 0 precision %.6f recall %.6f f1 %.6f support %zu\n"
                "class 1 precision %.6f recall %.6f f1 %.6f support %zu\n"
                "tp %zu fp %zu tn %zu fn %zu\n",
                r.macro_f1, r.accuracy, r.per_class[0].precision, r.per_class[0].recall, r.per_class[0].f1,
                r.per_class[0].support, r.per_class[1].precision, r.per_class[1].recall, r.per_class[1].f1,
                r.per_class[1].support, r.counts.tp, r.counts.fp, r.counts.tn, r.counts.fn);
  return buf;
}

}  // namespace bhavnet
