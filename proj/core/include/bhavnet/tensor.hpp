#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "bhavnet/rng.hpp"

namespace bhavnet {

/// Dense row-major tensor of doubles.
///
/// Rank 1 tensors are vectors, rank 2 tensors are matrices with rows as
/// the leading extent. Every operation in this header returns a fresh value;
/// inputs are never modified.
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;

  Tensor() : shape_{1}, data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }
  static Tensor identity(std::size_t n);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  // Leading extent for matrices; 1 for vectors.
  std::size_t rows() const noexcept { return shape_.size() == 2 ? shape_[0] : 1; }
  // Trailing extent.
  std::size_t cols() const noexcept { return shape_.back(); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * cols(), cols()); }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols(), cols());
  }

  Tensor reshaped(Shape shape) const;
  bool all_finite() const noexcept;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

std::string shape_string(const Tensor::Shape& shape);

Tensor matmul(const Tensor& a, const Tensor& b);
// a * b^T without materializing the transpose. a: m x k, b: n x k.
Tensor matmul_nt(const Tensor& a, const Tensor& b);
// a^T * b. a: k x m, b: k x n.
Tensor matmul_tn(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor relu(const Tensor& x);

// Inverted-dropout keep mask: entries are 0 or 1/(1-rate).
Tensor dropout_mask(const Tensor::Shape& shape, double rate, Rng& rng);
Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng);

Tensor tanh_op(const Tensor& x);
double sigmoid(double x);
Tensor sigmoid(const Tensor& x);
Tensor softmax(const Tensor& x);
// Concatenation along the trailing axis. All parts share their leading extent.
Tensor concat(std::span<const Tensor> parts);
Tensor mean_rows(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

// Uniform on +-sqrt(6 / (rows + cols)).
Tensor xavier_init(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace bhavnet
