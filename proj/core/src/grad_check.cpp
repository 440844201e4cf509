#include "bhavnet/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "bhavnet/error.hpp"

namespace bhavnet {
namespace {

struct Evaluation {
  double value;
  std::uint64_t signature;
};

Evaluation evaluate(const TapeFunction& f, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(params.size());
  for (const Tensor& p : params) leaves.push_back(tape.leaf(p));
  const Var out = f(tape, leaves);
  const Tensor& v = tape.value(out);
  if (v.size() != 1) throw DimensionError("grad_check: function must return a scalar, got " + shape_string(v.shape()));
  if (!std::isfinite(v[0])) throw EvaluationError("grad_check: function value is not finite");
  return {v[0], tape.branch_signature()};
}

}  // namespace

double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

GradCheckResult grad_check(const TapeFunction& f, std::vector<Tensor> params, double eps) {
  if (!(eps > 0.0)) throw InvalidInput("grad_check: eps must be positive");
  GradCheckResult result;

  {
    Tape tape;
    std::vector<Var> leaves;
    for (const Tensor& p : params) leaves.push_back(tape.leaf(p));
    const Var out = f(tape, leaves);
    if (tape.value(out).size() != 1) throw DimensionError("grad_check: function must return a scalar");
    if (!std::isfinite(tape.value(out)[0])) throw EvaluationError("grad_check: function value is not finite");
    tape.backward(out);
    for (Var leaf : leaves) result.analytic.push_back(tape.grad(leaf));
  }

  result.per_param.assign(params.size(), 0.0);
  for (std::size_t p = 0; p < params.size(); ++p) {
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      const double original = params[p][i];
      params[p][i] = original + eps;
      const Evaluation plus = evaluate(f, params);
      params[p][i] = original - eps;
      const Evaluation minus = evaluate(f, params);
      params[p][i] = original;
      if (plus.signature != minus.signature) {
        ++result.skipped_kinks;
        continue;
      }
      const double numeric = (plus.value - minus.value) / (2.0 * eps);
      const double err = relative_error(result.analytic[p][i], numeric);
      result.per_param[p] = std::max(result.per_param[p], err);
      ++result.checked;
    }
    result.max_relative_error = std::max(result.max_relative_error, result.per_param[p]);
  }
  return result;
}

}  // namespace bhavnet
