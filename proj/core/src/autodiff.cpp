#include "bhavnet/autodiff.hpp"

#include <cmath>
#include <string>

#include "bhavnet/error.hpp"

namespace bhavnet {

Var Tape::push(Tensor value, bool requires_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

Var Tape::record(Tensor value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (Var in : inputs) needs = needs || nodes_.at(in.id).requires_grad;
  return push(std::move(value), needs, needs ? std::move(backward) : Backward{});
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  return n.has_grad ? n.grad : Tensor::zeros_like(n.value);
}

Tensor& Tape::grad_buffer(Var v) {
  Node& n = nodes_.at(v.id);
  if (!n.has_grad) {
    n.grad = Tensor::zeros_like(n.value);
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::accumulate(Var v, const Tensor& g) {
  if (!nodes_.at(v.id).requires_grad) return;
  Tensor& buf = grad_buffer(v);
  if (buf.size() != g.size()) {
    throw DimensionError("Tape::accumulate: adjoint " + shape_string(g.shape()) + " for value " +
                         shape_string(buf.shape()));
  }
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

void Tape::backward(Var root) {
  if (nodes_.at(root.id).value.size() != 1) {
    throw DimensionError("Tape::backward: root must be a scalar, got " + shape_string(value(root).shape()));
  }
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  grad_buffer(root)[0] = 1.0;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    // The closure may touch other nodes' buffers, so hand it a copy of this adjoint.
    const Tensor g = n.grad;
    n.backward(*this, g);
  }
}

void Tape::note_branches(std::span<const double> arguments, double kink) {
  std::uint64_t word = 0;
  std::size_t bits = 0;
  for (double x : arguments) {
    word = (word << 1) | (x > kink ? 1u : 0u);
    const double gap = std::abs(x - kink);
    if (gap < min_kink_gap_) min_kink_gap_ = gap;
    if (++bits == 64) {
      signature_ = splitmix64(signature_ ^ word);
      word = 0;
      bits = 0;
    }
  }
  signature_ = splitmix64(signature_ ^ word ^ (static_cast<std::uint64_t>(bits) << 56));
}

void Tape::note_branch(bool taken) { signature_ = splitmix64(signature_ ^ (taken ? 0xA5u : 0x5Au)); }

void Tape::note_structure(std::uint64_t token) { signature_ = splitmix64(signature_ ^ splitmix64(token)); }

namespace ad {

Var matmul(Tape& t, Var a, Var b) {
  Tensor out = bhavnet::matmul(t.value(a), t.value(b));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, bhavnet::matmul_nt(g, tp.value(b)));
    if (tp.requires_grad(b)) tp.accumulate(b, bhavnet::matmul_tn(tp.value(a), g));
  });
}

Var matmul_nt(Tape& t, Var a, Var w) {
  Tensor out = bhavnet::matmul_nt(t.value(a), t.value(w));
  return t.record(std::move(out), {a, w}, [a, w](Tape& tp, const Tensor& g) {
    // out = a w^T: d a = g w, d w = g^T a.
    if (tp.requires_grad(a)) tp.accumulate(a, bhavnet::matmul(g, tp.value(w)));
    if (tp.requires_grad(w)) tp.accumulate(w, bhavnet::matmul_tn(g, tp.value(a)));
  });
}

Var add_row_bias(Tape& t, Var x, Var b) {
  const Tensor& xv = t.value(x);
  const Tensor& bv = t.value(b);
  if (xv.rank() != 2 || bv.rank() != 1 || bv.size() != xv.cols()) {
    throw DimensionError("add_row_bias: " + shape_string(xv.shape()) + " + " + shape_string(bv.shape()));
  }
  Tensor out = xv;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
  }
  return t.record(std::move(out), {x, b}, [x, b](Tape& tp, const Tensor& g) {
    tp.accumulate(x, g);
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad_buffer(b);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto row = g.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
      }
    }
  });
}

Var linear(Tape& t, Var x, Var w, Var b) { return add_row_bias(t, matmul_nt(t, x, w), b); }

Var add(Tape& t, Var a, Var b) {
  Tensor out = bhavnet::add(t.value(a), t.value(b));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var scale(Tape& t, Var a, double c) {
  Tensor out = bhavnet::scale(t.value(a), c);
  return t.record(std::move(out), {a}, [a, c](Tape& tp, const Tensor& g) { tp.accumulate(a, bhavnet::scale(g, c)); });
}

Var sum(Tape& t, Var a) {
  double s = 0.0;
  for (double v : t.value(a).data()) s += v;
  return t.record(Tensor::vector({s}), {a}, [a](Tape& tp, const Tensor& g) {
    Tensor& ga = tp.grad_buffer(a);
    for (double& v : ga.data()) v += g[0];
  });
}

Var reshape(Tape& t, Var a, Tensor::Shape shape) {
  Tensor out = t.value(a).reshaped(std::move(shape));
  return t.record(std::move(out), {a}, [a](Tape& tp, const Tensor& g) {
    Tensor& ga = tp.grad_buffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
  });
}

Var relu(Tape& t, Var x) {
  t.note_branches(t.value(x).data());
  Tensor out = bhavnet::relu(t.value(x));
  return t.record(std::move(out), {x}, [x](Tape& tp, const Tensor& g) {
    const Tensor& xv = tp.value(x);
    Tensor& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i)
      if (xv[i] > 0.0) gx[i] += g[i];
  });
}

Var dropout(Tape& t, Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw ConfigError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return x;
  Tensor mask = dropout_mask(t.value(x).shape(), rate, rng);
  Tensor out = t.value(x);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return t.record(std::move(out), {x}, [x, mask = std::move(mask)](Tape& tp, const Tensor& g) {
    Tensor& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

Var tanh(Tape& t, Var x) {
  Tensor out = tanh_op(t.value(x));
  const Tensor saved = out;
  return t.record(std::move(out), {x}, [x, saved](Tape& tp, const Tensor& g) {
    Tensor& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * (1.0 - saved[i] * saved[i]);
  });
}

Var sigmoid(Tape& t, Var x) {
  Tensor out = bhavnet::sigmoid(t.value(x));
  const Tensor saved = out;
  return t.record(std::move(out), {x}, [x, saved](Tape& tp, const Tensor& g) {
    Tensor& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * saved[i] * (1.0 - saved[i]);
  });
}

Var softmax(Tape& t, Var x) {
  Tensor out = bhavnet::softmax(t.value(x));
  const Tensor saved = out;
  return t.record(std::move(out), {x}, [x, saved](Tape& tp, const Tensor& g) {
    double inner = 0.0;
    for (std::size_t i = 0; i < saved.size(); ++i) inner += g[i] * saved[i];
    Tensor& gx = tp.grad_buffer(x);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += saved[i] * (g[i] - inner);
  });
}

Var concat(Tape& t, std::span<const Var> parts) {
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (Var p : parts) values.push_back(t.value(p));
  Tensor out = bhavnet::concat(values);
  std::vector<Var> inputs(parts.begin(), parts.end());
  return t.record(std::move(out), parts, [inputs](Tape& tp, const Tensor& g) {
    std::size_t offset = 0;
    for (Var p : inputs) {
      const std::size_t width = tp.value(p).cols();
      if (tp.requires_grad(p)) {
        Tensor& gp = tp.grad_buffer(p);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto src = g.row(r).subspan(offset, width);
          auto dst = gp.row(r);
          for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
        }
      }
      offset += width;
    }
  });
}

Var mean_rows(Tape& t, Var x) {
  Tensor out = bhavnet::mean_rows(t.value(x));
  return t.record(std::move(out), {x}, [x](Tape& tp, const Tensor& g) {
    Tensor& gx = tp.grad_buffer(x);
    const double inv = 1.0 / static_cast<double>(gx.rows());
    for (std::size_t r = 0; r < gx.rows(); ++r) {
      auto row = gx.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += g[c] * inv;
    }
  });
}

namespace {

void require_same(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape() || a.rank() != 2) {
    throw DimensionError(std::string(op) + ": " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
  }
}

}  // namespace

Var row_dot(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same(av, bv, "row_dot");
  Tensor out({av.rows()});
  for (std::size_t r = 0; r < av.rows(); ++r) out[r] = dot(av.row(r), bv.row(r));
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(a);
    const Tensor& bv = tp.value(b);
    if (tp.requires_grad(a)) {
      Tensor& ga = tp.grad_buffer(a);
      for (std::size_t r = 0; r < av.rows(); ++r)
        for (std::size_t c = 0; c < av.cols(); ++c) ga(r, c) += g[r] * bv(r, c);
    }
    if (tp.requires_grad(b)) {
      Tensor& gb = tp.grad_buffer(b);
      for (std::size_t r = 0; r < av.rows(); ++r)
        for (std::size_t c = 0; c < av.cols(); ++c) gb(r, c) += g[r] * av(r, c);
    }
  });
}

Var row_cosine(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_same(av, bv, "row_cosine");
  const std::size_t n = av.rows();
  Tensor out({n});
  std::vector<double> na(n), nb(n);
  for (std::size_t r = 0; r < n; ++r) {
    na[r] = norm(av.row(r));
    nb[r] = norm(bv.row(r));
    const bool guarded = na[r] < kCosineNormFloor || nb[r] < kCosineNormFloor;
    t.note_branch(guarded);
    out[r] = guarded ? 0.0 : dot(av.row(r), bv.row(r)) / (na[r] * nb[r]);
  }
  const Tensor cos = out;
  return t.record(std::move(out), {a, b}, [a, b, na, nb, cos](Tape& tp, const Tensor& g) {
    const Tensor& av = tp.value(a);
    const Tensor& bv = tp.value(b);
    for (std::size_t r = 0; r < av.rows(); ++r) {
      if (na[r] < kCosineNormFloor || nb[r] < kCosineNormFloor) continue;
      const double inv = 1.0 / (na[r] * nb[r]);
      if (tp.requires_grad(a)) {
        auto ga = tp.grad_buffer(a).row(r);
        for (std::size_t c = 0; c < ga.size(); ++c)
          ga[c] += g[r] * (bv(r, c) * inv - cos[r] * av(r, c) / (na[r] * na[r]));
      }
      if (tp.requires_grad(b)) {
        auto gb = tp.grad_buffer(b).row(r);
        for (std::size_t c = 0; c < gb.size(); ++c)
          gb[c] += g[r] * (av(r, c) * inv - cos[r] * bv(r, c) / (nb[r] * nb[r]));
      }
    }
  });
}

}  // namespace ad
}  // namespace bhavnet
