#include <gtest/gtest.h>

#include <cmath>

#include "bhavnet/autodiff.hpp"
#include "bhavnet/error.hpp"
#include "bhavnet/grad_check.hpp"
#include "bhavnet/rng.hpp"
#include "oracles.hpp"

using namespace bhavnet;

namespace {

// Plain central differences, independent of grad_check.
std::vector<double> numeric_gradient(const std::function<double(const Tensor&)>& f, Tensor x, double eps = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + eps;
    const double up = f(x);
    x[i] = orig - eps;
    const double down = f(x);
    x[i] = orig;
    g[i] = (up - down) / (2 * eps);
  }
  return g;
}

double max_rel(const GradCheckResult& r) { return r.max_relative_error; }

}  // namespace

TEST(Rng, SameSeedSameStream) {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, KnownFirstOutput) {
  // mt19937_64 with the default seed 5489 has a standard-mandated 10000th output.
  Rng r(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = r.next_u64();
  EXPECT_EQ(x, 9981545732273789042ull);
}

TEST(Rng, UniformAndBelowRanges) {
  Rng r(4);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Rng, NormalMoments) {
  Rng r(5);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Rng, StreamsAreIndependentAndStable) {
  Rng a = Rng::stream(42, Stream::init);
  Rng b = Rng::stream(42, Stream::dropout);
  Rng c = Rng::stream(42, Stream::init);
  const auto x = a.next_u64();
  EXPECT_NE(x, b.next_u64());
  EXPECT_EQ(x, c.next_u64());
}

TEST(Tape, ReluGradientMatchesFiniteDifferences) {
  Tape t;
  const Var x = t.leaf(Tensor::vector({-1, 2}));
  t.backward(ad::sum(t, ad::relu(t, x)));
  const Tensor g = t.grad(x);
  const auto fd = numeric_gradient(
      [](const Tensor& v) {
        double s = 0;
        for (double e : v.data()) s += e > 0 ? e : 0;
        return s;
      },
      Tensor::vector({-1, 2}));
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 1.0);
  EXPECT_NEAR(g[0], fd[0], 1e-9);
  EXPECT_NEAR(g[1], fd[1], 1e-9);
}

TEST(Tape, ReluSubgradientAtZeroIsZero) {
  Tape t;
  const Var x = t.leaf(Tensor::vector({0.0}));
  t.backward(ad::sum(t, ad::relu(t, x)));
  EXPECT_EQ(t.grad(x)[0], 0.0);
}

TEST(Tape, FanOutAccumulates) {
  Tape t;
  const Var x = t.leaf(Tensor::vector({3.0}));
  const Var y = ad::add(t, x, ad::add(t, x, x));  // 3x
  t.backward(ad::sum(t, y));
  EXPECT_DOUBLE_EQ(t.grad(x)[0], 3.0);
}

TEST(Tape, BackwardVisitsInReverseOrder) {
  Tape t;
  std::vector<int> order;
  const Var x = t.leaf(Tensor::vector({1.0}));
  const Var a = t.record(Tensor::vector({1.0}), {x}, [&order, x](Tape& tp, const Tensor& g) {
    order.push_back(1);
    tp.accumulate(x, g);
  });
  const Var b = t.record(Tensor::vector({1.0}), {a}, [&order, a](Tape& tp, const Tensor& g) {
    order.push_back(2);
    tp.accumulate(a, g);
  });
  t.backward(b);
  EXPECT_EQ(order, (std::vector<int>{2, 1}));
}

TEST(Tape, BackwardNeedsScalarRoot) {
  Tape t;
  const Var x = t.leaf(Tensor::vector({1, 2}));
  EXPECT_THROW(t.backward(x), DimensionError);
}

TEST(GradCheck, SumOfSquares) {
  const TapeFunction f = [](Tape& t, const std::vector<Var>& p) { return ad::row_dot(t, p[0], p[0]); };
  const auto r = grad_check(f, {Tensor::matrix({{1, 2}})});
  ASSERT_EQ(r.analytic.size(), 1u);
  EXPECT_NEAR(r.analytic[0][0], 2.0, 1e-12);
  EXPECT_NEAR(r.analytic[0][1], 4.0, 1e-12);
  EXPECT_LT(r.max_relative_error, 1e-9);
}

TEST(GradCheck, ConstantFunctionHasZeroGradient) {
  const TapeFunction f = [](Tape& t, const std::vector<Var>&) { return t.constant(Tensor::vector({4.0})); };
  const auto r = grad_check(f, {Tensor::vector({1, 2, 3})});
  for (double g : r.analytic[0].data()) EXPECT_EQ(g, 0.0);
  EXPECT_EQ(r.max_relative_error, 0.0);
}

TEST(GradCheck, NonFiniteIsAnEvaluationError) {
  const TapeFunction f = [](Tape& t, const std::vector<Var>&) {
    return t.constant(Tensor::vector({std::numeric_limits<double>::quiet_NaN()}));
  };
  EXPECT_THROW(grad_check(f, {Tensor::vector({1.0})}), EvaluationError);
}

TEST(GradCheck, KinkStraddlingCoordinatesAreSkipped) {
  const TapeFunction f = [](Tape& t, const std::vector<Var>& p) { return ad::sum(t, ad::relu(t, p[0])); };
  const auto r = grad_check(f, {Tensor::vector({1e-7, 1.0})}, 1e-5);
  EXPECT_EQ(r.skipped_kinks, 1u);
  EXPECT_LT(r.max_relative_error, 1e-9);
}

// Every differentiable primitive against central differences on random small inputs.
class PrimitiveGradients : public ::testing::Test {
 protected:
  Rng rng{99};
  Tensor m(std::size_t r, std::size_t c) { return oracle::random_tensor(rng, {r, c}); }
  // Weighted sum so that every output coordinate matters differently.
  static Var reduce(Tape& t, Var y) {
    const std::size_t n = t.value(y).size();
    Tensor w({1, n});
    for (std::size_t i = 0; i < n; ++i) w[i] = 0.3 + 0.17 * static_cast<double>(i % 7);
    const Var wv = t.constant(w);
    return ad::sum(t, ad::row_dot(t, ad::reshape(t, y, {1, n}), wv));
  }
};

TEST_F(PrimitiveGradients, AllBelowOneInAMillion) {
  std::vector<std::pair<std::string, GradCheckResult>> results;
  const auto check = [&](const std::string& name, const TapeFunction& f, std::vector<Tensor> p) {
    results.emplace_back(name, grad_check(f, std::move(p)));
  };
  check("matmul", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::matmul(t, p[0], p[1])); },
        {m(3, 4), m(4, 2)});
  check("matmul_nt", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::matmul_nt(t, p[0], p[1])); },
        {m(3, 4), m(2, 4)});
  check("linear", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::linear(t, p[0], p[1], p[2])); },
        {m(3, 4), m(2, 4), oracle::random_tensor(rng, {2})});
  check("relu", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::relu(t, p[0])); }, {m(3, 3)});
  check("tanh", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::tanh(t, p[0])); }, {m(2, 3)});
  check("sigmoid", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::sigmoid(t, p[0])); }, {m(2, 3)});
  check("softmax", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::softmax(t, p[0])); },
        {oracle::random_tensor(rng, {5})});
  check("concat",
        [](Tape& t, const std::vector<Var>& p) {
          const std::vector<Var> parts{p[0], p[1]};
          return reduce(t, ad::concat(t, parts));
        },
        {m(2, 3), m(2, 2)});
  check("mean_rows", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::mean_rows(t, p[0])); }, {m(4, 3)});
  check("scale_add",
        [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::add(t, ad::scale(t, p[0], -1.7), p[1])); },
        {m(2, 2), m(2, 2)});
  check("row_dot", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::row_dot(t, p[0], p[1])); },
        {m(3, 4), m(3, 4)});
  check("row_cosine", [](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::row_cosine(t, p[0], p[1])); },
        {m(3, 4), m(3, 4)});
  Rng drop(1);
  check("dropout_eval",
        [&drop](Tape& t, const std::vector<Var>& p) { return reduce(t, ad::dropout(t, p[0], 0.5, false, drop)); },
        {m(2, 3)});
  for (const auto& [name, r] : results) EXPECT_LT(max_rel(r), 1e-6) << name;
}

TEST(Tape, DropoutGradientUsesTheSameMask) {
  Rng rng(3);
  Tape t;
  const Var x = t.leaf(Tensor({50}, 1.0));
  const Var y = ad::dropout(t, x, 0.4, true, rng);
  t.backward(ad::sum(t, y));
  const Tensor& out = t.value(y);
  const Tensor g = t.grad(x);
  for (std::size_t i = 0; i < 50; ++i) EXPECT_DOUBLE_EQ(g[i], out[i]);
}

TEST(Tape, CosineGuardGivesZero) {
  Tape t;
  const Var a = t.leaf(Tensor::matrix({{0, 0}}));
  const Var b = t.leaf(Tensor::matrix({{1, 2}}));
  const Var c = ad::row_cosine(t, a, b);
  EXPECT_EQ(t.value(c)[0], 0.0);
  t.backward(ad::sum(t, c));
  EXPECT_EQ(t.grad(b)[0], 0.0);
}
