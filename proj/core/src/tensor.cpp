#include "bhavnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "bhavnet/error.hpp"

namespace bhavnet {
namespace {

std::size_t product(const Tensor::Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw DimensionError(std::string(op) + ": expected a matrix, got " + shape_string(t.shape()));
}

// c[m x n] += a[m x k] * b[k x n]; j innermost so the update vectorizes.
void gemm_accumulate(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ai[p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(product(shape_), fill) {
  if (shape_.empty()) throw DimensionError("Tensor: shape must have at least one extent");
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty()) throw DimensionError("Tensor: shape must have at least one extent");
  if (product(shape_) != data_.size()) {
    throw DimensionError("Tensor: shape " + shape_string(shape_) + " needs " + std::to_string(product(shape_)) +
                         " values, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Tensor::matrix: ragged rows");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor Tensor::reshaped(Shape shape) const { return Tensor(std::move(shape), data_); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string shape_string(const Tensor::Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner extents differ: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
  }
  Tensor c({a.rows(), b.cols()});
  gemm_accumulate(a.data().data(), b.data().data(), c.data().data(), a.rows(), a.cols(), b.cols());
  return c;
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  Tensor t({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner extents differ: " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  }
  const Tensor bt = transpose(b);
  Tensor c({a.rows(), b.rows()});
  gemm_accumulate(a.data().data(), bt.data().data(), c.data().data(), a.rows(), a.cols(), b.rows());
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_tn");
  require_matrix(b, "matmul_tn");
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_tn: inner extents differ: " + shape_string(a.shape()) + "^T x " +
                         shape_string(b.shape()));
  }
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  Tensor c({m, n});
  double* cd = c.data().data();
  for (std::size_t p = 0; p < k; ++p) {
    const double* ap = a.data().data() + p * m;
    const double* bp = b.data().data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double v = ap[i];
      if (v == 0.0) continue;
      double* ci = cd + i * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += v * bp[j];
    }
  }
  return c;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor dropout_mask(const Tensor::Shape& shape, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  Tensor mask(shape, 1.0);
  if (rate == 0.0) return mask;
  const double keep_scale = 1.0 / (1.0 - rate);
  for (double& m : mask.data()) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mask;
}

Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return x;
  const Tensor mask = dropout_mask(x.shape(), rate, rng);
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  return y;
}

Tensor tanh_op(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = std::tanh(v);
  return y;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) v = sigmoid(v);
  return y;
}

Tensor softmax(const Tensor& x) {
  if (x.rank() != 1) throw DimensionError("softmax: expected a vector, got " + shape_string(x.shape()));
  if (x.size() == 0) throw InvalidInput("softmax: empty input");
  const double mx = *std::max_element(x.data().begin(), x.data().end());
  Tensor y = x;
  double total = 0.0;
  for (double& v : y.data()) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : y.data()) v /= total;
  return y;
}

Tensor concat(std::span<const Tensor> parts) {
  if (parts.empty()) throw InvalidInput("concat: no parts");
  const std::size_t rank = parts.front().rank();
  const std::size_t rows = parts.front().rows();
  std::size_t width = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != rank || p.rows() != rows) {
      throw DimensionError("concat: part " + shape_string(p.shape()) + " does not conform to " +
                           shape_string(parts.front().shape()));
    }
    width += p.cols();
  }
  Tensor out = rank == 1 ? Tensor({width}) : Tensor({rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t offset = 0;
    auto dst = out.row(r);
    for (const Tensor& p : parts) {
      auto src = p.row(r);
      std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(offset));
      offset += p.cols();
    }
  }
  return out;
}

Tensor mean_rows(const Tensor& x) {
  require_matrix(x, "mean_rows");
  if (x.rows() == 0) throw InvalidInput("mean_rows: no rows");
  Tensor out({x.cols()});
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    for (std::size_t c = 0; c < x.cols(); ++c) out[c] += row[c];
  }
  const double n = static_cast<double>(x.rows());
  for (double& v : out.data()) v /= n;
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError("add: " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Tensor scale(const Tensor& a, double c) {
  Tensor out = a;
  for (double& v : out.data()) v *= c;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: widths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

Tensor xavier_init(std::size_t rows, std::size_t cols, Rng& rng) {
  if (rows == 0 || cols == 0) throw DimensionError("xavier_init: extents must be positive");
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor w({rows, cols});
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  return w;
}

}  // namespace bhavnet
