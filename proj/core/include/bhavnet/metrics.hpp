#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>

namespace bhavnet {

// Label 1 (antonym) is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  void add(int predicted, int actual);
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  bool operator==(const ConfusionCounts&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct EvalReport {
  // Index 0: synonym class, index 1: antonym class.
  std::array<ClassMetrics, 2> per_class{};
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  ConfusionCounts counts;
  // Number of P/R/F1 values that hit a zero denominator and were set to 0.
  std::size_t zero_division = 0;
};

EvalReport report_from_counts(const ConfusionCounts& counts);
EvalReport score(std::span<const int> predicted, std::span<const int> actual);

// ŷ >= 0.5 -> 1; a tie goes to the antonym class.
inline int threshold_label(double probability) noexcept { return probability >= 0.5 ? 1 : 0; }

std::string format_report(const EvalReport& r);

}  // namespace bhavnet
