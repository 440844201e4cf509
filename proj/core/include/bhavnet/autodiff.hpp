#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "bhavnet/tensor.hpp"

namespace bhavnet {

class Tape;

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = std::numeric_limits<std::size_t>::max();
  bool valid() const noexcept { return id != std::numeric_limits<std::size_t>::max(); }
};

/// Reverse-mode gradient tape.
///
/// Each primitive records its output value and a closure that maps the
/// output adjoint onto the adjoints of its inputs. backward() replays the
/// closures in exact reverse order of recording; adjoints accumulate
/// additively, so a value consumed twice receives the sum of both
/// contributions.
///
/// Piecewise primitives (relu, hinge, clamp, zero-norm guard) also fold
/// their branch decisions into a signature. Two evaluations of the same
/// program share a signature iff they took the same branches everywhere,
/// which is what the finite-difference checker uses to avoid straddling a
/// kink.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Tensor& out_grad)>;

  Var leaf(Tensor value) { return push(std::move(value), true, nullptr); }
  Var constant(Tensor value) { return push(std::move(value), false, nullptr); }
  // Records a derived value. The closure runs only if some input needs a gradient.
  Var record(Tensor value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Tensor value, std::span<const Var> inputs, Backward backward);

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }
  // Gradient after backward(); zeros for nodes the root does not depend on.
  Tensor grad(Var v) const;
  // Mutable, lazily zero-initialized adjoint buffer; for use inside Backward closures.
  Tensor& grad_buffer(Var v);
  void accumulate(Var v, const Tensor& g);

  // Seeds d(root)/d(root) = 1 and replays adjoints. root must hold a single value.
  void backward(Var root);

  std::size_t size() const noexcept { return nodes_.size(); }

  void note_branches(std::span<const double> arguments, double kink = 0.0);
  void note_branch(bool taken);
  // Folds a discrete structural choice (e.g. a data-dependent edge) into the signature.
  void note_structure(std::uint64_t token);
  std::uint64_t branch_signature() const noexcept { return signature_; }
  // Smallest |argument - kink| seen by any piecewise primitive.
  double min_kink_gap() const noexcept { return min_kink_gap_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    Backward backward;
  };

  Var push(Tensor value, bool requires_grad, Backward backward);

  std::vector<Node> nodes_;
  std::uint64_t signature_ = 0x9E3779B97F4A7C15ULL;
  double min_kink_gap_ = std::numeric_limits<double>::infinity();
};

namespace ad {

Var matmul(Tape& t, Var a, Var b);
// a * w^T, the layout of every weight matrix (out x in).
Var matmul_nt(Tape& t, Var a, Var w);
// Adds vector b to every row of x.
Var add_row_bias(Tape& t, Var x, Var b);
Var linear(Tape& t, Var x, Var w, Var b);
Var add(Tape& t, Var a, Var b);
Var scale(Tape& t, Var a, double c);
Var sum(Tape& t, Var a);
Var reshape(Tape& t, Var a, Tensor::Shape shape);

Var relu(Tape& t, Var x);
// Inverted dropout; identity outside training or at rate 0. The mask is drawn once and reused by backward.
Var dropout(Tape& t, Var x, double rate, bool training, Rng& rng);
Var tanh(Tape& t, Var x);
Var sigmoid(Tape& t, Var x);
Var softmax(Tape& t, Var x);
Var concat(Tape& t, std::span<const Var> parts);
Var mean_rows(Tape& t, Var x);

// Per-row dot products of two equally shaped matrices -> vector.
Var row_dot(Tape& t, Var a, Var b);
// Per-row cosine similarity; rows with norm below 1e-12 score 0 with zero gradient.
Var row_cosine(Tape& t, Var a, Var b);

}  // namespace ad

inline constexpr double kCosineNormFloor = 1e-12;

}  // namespace bhavnet
