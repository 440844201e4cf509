#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "bhavnet/autodiff.hpp"

namespace bhavnet {

// Builds a scalar on the tape from parameter leaves bound in the given order.
using TapeFunction = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  // Per parameter tensor, same order as the input list.
  std::vector<double> per_param;
  std::vector<Tensor> analytic;
  std::size_t checked = 0;
  // Coordinates skipped because +-eps evaluations took different branches.
  std::size_t skipped_kinks = 0;
};

/// Compares tape gradients against central differences.
///
/// Per coordinate: |analytic - numeric| / max(1e-8, |analytic| + |numeric|),
/// maximized over all coordinates. A coordinate whose perturbed evaluations
/// land on different sides of a ReLU, hinge or clamp is not comparable and is
/// counted in skipped_kinks instead. Throws EvaluationError on non-finite f.
GradCheckResult grad_check(const TapeFunction& f, std::vector<Tensor> params, double eps = 1e-5);

double relative_error(double analytic, double numeric);

}  // namespace bhavnet
