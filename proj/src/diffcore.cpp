// Copyright 2026 The ntlp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ntlp/diffcore.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace ntlp::diff {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != numel(shape_)) {
    throw std::invalid_argument(fmt::format(
        "Tensor: shape {} needs {} values, got {}", shape_, numel(shape_),
        data_.size()));
  }
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw std::logic_error("Tensor::item on a non-scalar");
  }
  return data_[0];
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

const Shape& Value::shape() const { return tape_->shape(id_); }
std::size_t Value::size() const { return tape_->data(id_).size(); }
std::span<const double> Value::data() const { return tape_->data(id_); }
std::span<const double> Value::grad() const { return tape_->grad(id_); }
bool Value::requires_grad() const { return tape_->requires_grad(id_); }

double Value::item() const {
  const auto d = data();
  if (d.size() != 1) throw std::logic_error("Value::item on a non-scalar");
  return d[0];
}

Value Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Value(this, nodes_.size() - 1);
}

Value Tape::constant(Tensor value) {
  Node n;
  n.shape = value.shape();
  n.value = std::move(value.storage());
  return push(std::move(n));
}

Value Tape::variable(Tensor value) {
  Node n;
  n.shape = value.shape();
  n.value = std::move(value.storage());
  n.grad.assign(n.value.size(), 0.0);
  n.needs_grad = true;
  return push(std::move(n));
}

Value Tape::parameter(const Tensor& data, Tensor& grad) {
  if (data.shape() != grad.shape()) {
    throw std::invalid_argument("Tape::parameter: data/grad shape mismatch");
  }
  Node n;
  n.shape = data.shape();
  n.borrowed_value = data.values().data();
  n.borrowed_grad = grad.values().data();
  n.needs_grad = true;
  return push(std::move(n));
}

std::span<const double> Tape::data(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.borrowed_value) return {n.borrowed_value, numel(n.shape)};
  return n.value;
}

std::span<const double> Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.borrowed_grad) return {n.borrowed_grad, numel(n.shape)};
  return n.grad;
}

std::span<double> Tape::grad_mut(std::size_t id) {
  Node& n = nodes_[id];
  if (n.borrowed_grad) return {n.borrowed_grad, numel(n.shape)};
  return n.grad;
}

Value Tape::record(Shape shape, std::vector<double> value,
                   std::initializer_list<Value> inputs, Backward backward) {
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(value);
  if (n.value.size() != numel(n.shape)) {
    throw std::logic_error("Tape::record: value/shape mismatch");
  }
  for (const Value& in : inputs) {
    if (in.tape() != this) {
      throw std::invalid_argument("Tape::record: input from another tape");
    }
    n.needs_grad = n.needs_grad || requires_grad(in.id());
  }
  if (n.needs_grad) {
    n.grad.assign(n.value.size(), 0.0);
    n.backward = std::move(backward);
  }
  return push(std::move(n));
}

void Tape::backward(Value root) {
  if (root.size() != 1) {
    throw std::invalid_argument("Tape::backward: root must be a scalar");
  }
  const double one = 1.0;
  backward(root, std::span<const double>(&one, 1));
}

void Tape::backward(Value root, std::span<const double> seed) {
  if (root.tape() != this) {
    throw std::invalid_argument("Tape::backward: root from another tape");
  }
  if (seed.size() != root.size()) {
    throw std::invalid_argument("Tape::backward: seed size mismatch");
  }
  if (!requires_grad(root.id())) return;
  auto g = grad_mut(root.id());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += seed[i];
  for (std::size_t id = root.id() + 1; id-- > 0;) {
    if (nodes_[id].backward) nodes_[id].backward(*this, id);
  }
}

namespace {

void require_same_shape(const Value& a, const Value& b, const char* op) {
  if (a.tape() != b.tape()) {
    throw std::invalid_argument(fmt::format("{}: operands on different tapes", op));
  }
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(fmt::format("{}: shape mismatch {} vs {}", op,
                                            a.shape(), b.shape()));
  }
}

std::vector<double> copy_of(std::span<const double> s) {
  return {s.begin(), s.end()};
}

// Elementwise binary op with per-element partials.
template <typename Fwd, typename DA, typename DB>
Value binary(Value a, Value b, const char* name, Fwd fwd, DA da, DB db) {
  require_same_shape(a, b, name);
  Tape& tape = *a.tape();
  const auto x = a.data();
  const auto y = b.data();
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(x[i], y[i]);
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(a.shape(), std::move(out), {a, b},
                     [ia, ib, da, db](Tape& t, std::size_t self) {
                       const auto g = t.grad(self);
                       const auto x = t.data(ia);
                       const auto y = t.data(ib);
                       if (t.requires_grad(ia)) {
                         auto ga = t.grad_mut(ia);
                         for (std::size_t i = 0; i < g.size(); ++i)
                           ga[i] += g[i] * da(x[i], y[i]);
                       }
                       if (t.requires_grad(ib)) {
                         auto gb = t.grad_mut(ib);
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gb[i] += g[i] * db(x[i], y[i]);
                       }
                     });
}

template <typename Fwd, typename D>
Value unary(Value x, Fwd fwd, D deriv) {
  Tape& tape = *x.tape();
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  const std::size_t ix = x.id();
  return tape.record(x.shape(), std::move(out), {x},
                     [ix, deriv](Tape& t, std::size_t self) {
                       const auto g = t.grad(self);
                       const auto in = t.data(ix);
                       const auto out = t.data(self);
                       auto gx = t.grad_mut(ix);
                       for (std::size_t i = 0; i < g.size(); ++i)
                         gx[i] += g[i] * deriv(in[i], out[i]);
                     });
}

Shape drop_last(const Shape& s) { return Shape(s.begin(), s.end() - 1); }

Value reduce_extremum(Value x, bool take_min) {
  if (x.shape().empty() || x.shape().back() == 0) {
    throw std::invalid_argument("reduce_min/reduce_max: empty input");
  }
  Tape& tape = *x.tape();
  const std::size_t n = x.shape().back();
  const auto in = x.data();
  const std::size_t rows = in.size() / n;
  std::vector<double> out(rows);
  std::vector<std::size_t> arg(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t best = 0;
    const double* row = in.data() + r * n;
    for (std::size_t i = 1; i < n; ++i) {
      if (take_min ? row[i] < row[best] : row[i] > row[best]) best = i;
    }
    arg[r] = r * n + best;
    out[r] = row[best];
  }
  const std::size_t ix = x.id();
  return tape.record(drop_last(x.shape()), std::move(out), {x},
                     [ix, arg = std::move(arg)](Tape& t, std::size_t self) {
                       const auto g = t.grad(self);
                       auto gx = t.grad_mut(ix);
                       for (std::size_t r = 0; r < g.size(); ++r)
                         gx[arg[r]] += g[r];
                     });
}

}  // namespace

Value add(Value a, Value b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Value sub(Value a, Value b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Value mul(Value a, Value b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Value div(Value a, Value b) {
  return binary(
      a, b, "div", [](double x, double y) { return x / y; },
      [](double, double y) { return 1.0 / y; },
      [](double x, double y) { return -x / (y * y); });
}

Value min2(Value a, Value b) {
  return binary(
      a, b, "min2", [](double x, double y) { return y < x ? y : x; },
      [](double x, double y) { return y < x ? 0.0 : 1.0; },
      [](double x, double y) { return y < x ? 1.0 : 0.0; });
}

Value max2(Value a, Value b) {
  return binary(
      a, b, "max2", [](double x, double y) { return y > x ? y : x; },
      [](double x, double y) { return y > x ? 0.0 : 1.0; },
      [](double x, double y) { return y > x ? 1.0 : 0.0; });
}

Value add_scalar(Value x, double c) {
  return unary(
      x, [c](double v) { return v + c; }, [](double, double) { return 1.0; });
}

Value scale(Value x, double c) {
  return unary(
      x, [c](double v) { return v * c; }, [c](double, double) { return c; });
}

Value scale(Value x, Value s) {
  if (s.size() != 1) throw std::invalid_argument("scale: factor must be scalar");
  if (x.tape() != s.tape()) throw std::invalid_argument("scale: different tapes");
  Tape& tape = *x.tape();
  const double f = s.item();
  const auto in = x.data();
  std::vector<double> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * f;
  const std::size_t ix = x.id(), is = s.id();
  return tape.record(x.shape(), std::move(out), {x, s},
                     [ix, is](Tape& t, std::size_t self) {
                       const auto g = t.grad(self);
                       const double f = t.data(is)[0];
                       if (t.requires_grad(ix)) {
                         auto gx = t.grad_mut(ix);
                         for (std::size_t i = 0; i < g.size(); ++i)
                           gx[i] += g[i] * f;
                       }
                       if (t.requires_grad(is)) {
                         const auto in = t.data(ix);
                         double acc = 0.0;
                         for (std::size_t i = 0; i < g.size(); ++i)
                           acc += g[i] * in[i];
                         t.grad_mut(is)[0] += acc;
                       }
                     });
}

Value clamp(Value x, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("clamp: lo > hi");
  return unary(
      x, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v, double) { return (v > lo && v < hi) ? 1.0 : 0.0; });
}

Value sigmoid(Value x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Value less_than(Value x, double threshold) {
  const auto in = x.data();
  std::vector<double> mask(in.size());
  for (std::size_t i = 0; i < in.size(); ++i)
    mask[i] = in[i] < threshold ? 1.0 : 0.0;
  return x.tape()->constant(Tensor(x.shape(), std::move(mask)));
}

Value sum(Value x) {
  Tape& tape = *x.tape();
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  const std::size_t ix = x.id();
  return tape.record({}, {acc}, {x}, [ix](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    for (double& gx : t.grad_mut(ix)) gx += g;
  });
}

Value mean(Value x) {
  if (x.size() == 0) throw std::invalid_argument("mean: empty input");
  return scale(sum(x), 1.0 / static_cast<double>(x.size()));
}

Value sum_abs(Value x) {
  Tape& tape = *x.tape();
  double acc = 0.0;
  for (double v : x.data()) acc += std::abs(v);
  const std::size_t ix = x.id();
  return tape.record({}, {acc}, {x}, [ix](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const auto in = t.data(ix);
    auto gx = t.grad_mut(ix);
    for (std::size_t i = 0; i < in.size(); ++i) {
      if (in[i] > 0.0) gx[i] += g;
      else if (in[i] < 0.0) gx[i] -= g;
    }
  });
}

Value dot(Value a, Value b) {
  require_same_shape(a, b, "dot");
  if (a.shape().size() != 1) throw std::invalid_argument("dot: rank-1 inputs");
  Tape& tape = *a.tape();
  const auto x = a.data();
  const auto y = b.data();
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record({}, {acc}, {a, b}, [ia, ib](Tape& t, std::size_t self) {
    const double g = t.grad(self)[0];
    const auto x = t.data(ia);
    const auto y = t.data(ib);
    if (t.requires_grad(ia)) {
      auto ga = t.grad_mut(ia);
      for (std::size_t i = 0; i < x.size(); ++i) ga[i] += g * y[i];
    }
    if (t.requires_grad(ib)) {
      auto gb = t.grad_mut(ib);
      for (std::size_t i = 0; i < x.size(); ++i) gb[i] += g * x[i];
    }
  });
}

Value reduce_min(Value x) { return reduce_extremum(x, true); }
Value reduce_max(Value x) { return reduce_extremum(x, false); }

Value vecmat(Value x, Value w) {
  if (x.tape() != w.tape()) throw std::invalid_argument("vecmat: different tapes");
  if (x.shape().size() != 1 || w.shape().size() != 2 ||
      w.shape()[0] != x.shape()[0]) {
    throw std::invalid_argument(fmt::format("vecmat: shape mismatch {} x {}",
                                            x.shape(), w.shape()));
  }
  Tape& tape = *x.tape();
  const std::size_t d = w.shape()[0], m = w.shape()[1];
  const auto xv = x.data();
  const auto wv = w.data();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double xi = xv[i];
    if (xi == 0.0) continue;
    const double* row = wv.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) out[j] += xi * row[j];
  }
  const std::size_t ixx = x.id(), iw = w.id();
  return tape.record({m}, std::move(out), {x, w},
                     [ixx, iw, d, m](Tape& t, std::size_t self) {
                       const auto g = t.grad(self);
                       const auto xv = t.data(ixx);
                       const auto wv = t.data(iw);
                       if (t.requires_grad(ixx)) {
                         auto gx = t.grad_mut(ixx);
                         for (std::size_t i = 0; i < d; ++i) {
                           const double* row = wv.data() + i * m;
                           double acc = 0.0;
                           for (std::size_t j = 0; j < m; ++j) acc += row[j] * g[j];
                           gx[i] += acc;
                         }
                       }
                       if (t.requires_grad(iw)) {
                         auto gw = t.grad_mut(iw);
                         for (std::size_t i = 0; i < d; ++i) {
                           const double xi = xv[i];
                           if (xi == 0.0) continue;
                           double* row = gw.data() + i * m;
                           for (std::size_t j = 0; j < m; ++j) row[j] += xi * g[j];
                         }
                       }
                     });
}

Value matvec(Value mat, Value a) {
  if (mat.tape() != a.tape()) throw std::invalid_argument("matvec: different tapes");
  if (mat.shape().size() != 2 || a.shape().size() != 1 ||
      mat.shape()[1] != a.shape()[0]) {
    throw std::invalid_argument(fmt::format("matvec: shape mismatch {} x {}",
                                            mat.shape(), a.shape()));
  }
  Tape& tape = *mat.tape();
  const std::size_t b = mat.shape()[0], n = mat.shape()[1];
  const auto mv = mat.data();
  const auto av = a.data();
  std::vector<double> out(b, 0.0);
  for (std::size_t r = 0; r < b; ++r) {
    const double* row = mv.data() + r * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * av[j];
    out[r] = acc;
  }
  const std::size_t im = mat.id(), ia = a.id();
  return tape.record({b}, std::move(out), {mat, a},
                     [im, ia, b, n](Tape& t, std::size_t self) {
                       const auto g = t.grad(self);
                       const auto mv = t.data(im);
                       const auto av = t.data(ia);
                       if (t.requires_grad(ia)) {
                         auto ga = t.grad_mut(ia);
                         for (std::size_t r = 0; r < b; ++r) {
                           const double* row = mv.data() + r * n;
                           for (std::size_t j = 0; j < n; ++j) ga[j] += g[r] * row[j];
                         }
                       }
                       if (t.requires_grad(im)) {
                         auto gm = t.grad_mut(im);
                         for (std::size_t r = 0; r < b; ++r) {
                           double* row = gm.data() + r * n;
                           for (std::size_t j = 0; j < n; ++j) row[j] += g[r] * av[j];
                         }
                       }
                     });
}

Value conv1d_valid(Value x, Value kernel, std::size_t stride) {
  if (x.tape() != kernel.tape()) {
    throw std::invalid_argument("conv1d_valid: different tapes");
  }
  if (stride == 0) throw std::invalid_argument("conv1d_valid: stride must be >= 1");
  const Shape& ks = kernel.shape();
  const Shape& xs = x.shape();
  std::size_t kernel_rows = 1;
  if (ks.size() == 1) {
    if (xs.size() != 1) {
      throw std::invalid_argument("conv1d_valid: rank-1 kernel needs rank-1 input");
    }
  } else if (ks.size() == 2) {
    kernel_rows = ks[0];
    if (xs.size() < 2 || xs[xs.size() - 2] != kernel_rows) {
      throw std::invalid_argument(fmt::format(
          "conv1d_valid: input {} does not match kernel rows {}", xs, ks));
    }
  } else {
    throw std::invalid_argument("conv1d_valid: kernel must be rank 1 or 2");
  }
  const std::size_t len = ks.back();
  const std::size_t horizon = xs.back();
  if (len == 0 || len > horizon) {
    throw std::invalid_argument(fmt::format(
        "conv1d_valid: kernel length {} exceeds input length {}", len, horizon));
  }
  const std::size_t out_len = (horizon - len) / stride + 1;
  const std::size_t rows = numel(xs) / horizon;
  Shape out_shape = xs;
  out_shape.back() = out_len;

  const auto xv = x.data();
  const auto kv = kernel.data();
  std::vector<double> out(rows * out_len, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.data() + r * horizon;
    const double* k = kv.data() + (r % kernel_rows) * len;
    double* o = out.data() + r * out_len;
    for (std::size_t j = 0; j < out_len; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < len; ++i) acc += in[j * stride + i] * k[i];
      o[j] = acc;
    }
  }
  const std::size_t ixx = x.id(), ik = kernel.id();
  return x.tape()->record(
      std::move(out_shape), std::move(out), {x, kernel},
      [=](Tape& t, std::size_t self) {
        const auto g = t.grad(self);
        const auto xv = t.data(ixx);
        const auto kv = t.data(ik);
        const bool want_x = t.requires_grad(ixx);
        const bool want_k = t.requires_grad(ik);
        std::span<double> gx, gk;
        if (want_x) gx = t.grad_mut(ixx);
        if (want_k) gk = t.grad_mut(ik);
        for (std::size_t r = 0; r < rows; ++r) {
          const std::size_t krow = (r % kernel_rows) * len;
          const double* go = g.data() + r * out_len;
          for (std::size_t j = 0; j < out_len; ++j) {
            const double gj = go[j];
            if (gj == 0.0) continue;
            const std::size_t base = r * horizon + j * stride;
            for (std::size_t i = 0; i < len; ++i) {
              if (want_x) gx[base + i] += gj * kv[krow + i];
              if (want_k) gk[krow + i] += gj * xv[base + i];
            }
          }
        }
      });
}

Value softmax(Value x) {
  if (x.shape().empty() || x.shape().back() == 0) {
    throw std::invalid_argument("softmax: empty input");
  }
  Tape& tape = *x.tape();
  const std::size_t n = x.shape().back();
  const auto in = x.data();
  const std::size_t rows = in.size() / n;
  std::vector<double> out(in.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = in.data() + r * n;
    double* o = out.data() + r * n;
    const double top = *std::max_element(row, row + n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      o[i] = std::exp(row[i] - top);
      total += o[i];
    }
    for (std::size_t i = 0; i < n; ++i) o[i] /= total;
  }
  const std::size_t ix = x.id();
  return tape.record(x.shape(), std::move(out), {x},
                     [ix, n, rows](Tape& t, std::size_t self) {
                       const auto g = t.grad(self);
                       const auto y = t.data(self);
                       auto gx = t.grad_mut(ix);
                       for (std::size_t r = 0; r < rows; ++r) {
                         const std::size_t o = r * n;
                         double inner = 0.0;
                         for (std::size_t i = 0; i < n; ++i) inner += g[o + i] * y[o + i];
                         for (std::size_t i = 0; i < n; ++i)
                           gx[o + i] += y[o + i] * (g[o + i] - inner);
                       }
                     });
}

Value reshape(Value x, Shape shape) {
  if (numel(shape) != x.size()) {
    throw std::invalid_argument(fmt::format("reshape: {} -> {} changes size",
                                            x.shape(), shape));
  }
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(shape), copy_of(x.data()), {x},
                          [ix](Tape& t, std::size_t self) {
                            const auto g = t.grad(self);
                            auto gx = t.grad_mut(ix);
                            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                          });
}

Value gather(Value x, std::vector<std::size_t> indices, Shape shape) {
  if (numel(shape) != indices.size()) {
    throw std::invalid_argument("gather: shape does not match index count");
  }
  const auto in = x.data();
  std::vector<double> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= in.size()) throw std::out_of_range("gather: index out of range");
    out[i] = in[indices[i]];
  }
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(shape), std::move(out), {x},
                          [ix, idx = std::move(indices)](Tape& t, std::size_t self) {
                            const auto g = t.grad(self);
                            auto gx = t.grad_mut(ix);
                            for (std::size_t i = 0; i < idx.size(); ++i) gx[idx[i]] += g[i];
                          });
}

Value broadcast_last(Value x, std::size_t n) {
  const auto in = x.data();
  std::vector<double> out(in.size() * n);
  for (std::size_t i = 0; i < in.size(); ++i)
    std::fill_n(out.begin() + static_cast<std::ptrdiff_t>(i * n), n, in[i]);
  Shape shape = x.shape();
  shape.push_back(n);
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(shape), std::move(out), {x},
                          [ix, n](Tape& t, std::size_t self) {
                            const auto g = t.grad(self);
                            auto gx = t.grad_mut(ix);
                            for (std::size_t i = 0; i < gx.size(); ++i) {
                              double acc = 0.0;
                              for (std::size_t j = 0; j < n; ++j) acc += g[i * n + j];
                              gx[i] += acc;
                            }
                          });
}

Value concat(const std::vector<Value>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  Tape& tape = *parts.front().tape();
  std::vector<double> out;
  std::vector<std::size_t> ids, offsets;
  bool needs = false;
  for (const Value& p : parts) {
    if (p.tape() != &tape) throw std::invalid_argument("concat: different tapes");
    offsets.push_back(out.size());
    ids.push_back(p.id());
    const auto d = p.data();
    out.insert(out.end(), d.begin(), d.end());
    needs = needs || p.requires_grad();
  }
  const std::size_t total = out.size();
  auto backward = [ids, offsets](Tape& t, std::size_t self) {
    const auto g = t.grad(self);
    for (std::size_t p = 0; p < ids.size(); ++p) {
      if (!t.requires_grad(ids[p])) continue;
      auto gp = t.grad_mut(ids[p]);
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offsets[p] + i];
    }
  };
  if (!needs) return tape.constant(Tensor({total}, std::move(out)));
  // The closure visits every part; one differentiable part as the nominal
  // input is enough to mark the node.
  for (const Value& p : parts) {
    if (p.requires_grad()) {
      return tape.record({total}, std::move(out), {p}, std::move(backward));
    }
  }
  return tape.constant(Tensor({total}, std::move(out)));
}

Value sum_blocks(Value x, Shape shape) {
  const std::size_t block = numel(shape);
  if (block == 0 || x.size() % block != 0) {
    throw std::invalid_argument("sum_blocks: size is not a multiple of the block");
  }
  const auto in = x.data();
  const std::size_t groups = in.size() / block;
  std::vector<double> out(block, 0.0);
  for (std::size_t g = 0; g < groups; ++g)
    for (std::size_t i = 0; i < block; ++i) out[i] += in[g * block + i];
  const std::size_t ix = x.id();
  return x.tape()->record(std::move(shape), std::move(out), {x},
                          [ix, block, groups](Tape& t, std::size_t self) {
                            const auto g = t.grad(self);
                            auto gx = t.grad_mut(ix);
                            for (std::size_t k = 0; k < groups; ++k)
                              for (std::size_t i = 0; i < block; ++i)
                                gx[k * block + i] += g[i];
                          });
}

Value dropout(Value x, double rate, std::mt19937_64& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument(fmt::format("dropout: rate {} outside [0, 1)", rate));
  }
  if (!training || rate == 0.0) return scale(x, 1.0);
  std::bernoulli_distribution keep(1.0 - rate);
  const double factor = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = keep(rng) ? factor : 0.0;
  return mul(x, x.tape()->constant(Tensor(x.shape(), std::move(mask))));
}

Value binary_cross_entropy(Value p, std::span<const double> targets) {
  if (p.size() != targets.size() || p.size() == 0) {
    throw std::invalid_argument("binary_cross_entropy: size mismatch");
  }
  const auto in = p.data();
  const double n = static_cast<double>(in.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    acc -= targets[i] * std::log(in[i]) + (1.0 - targets[i]) * std::log(1.0 - in[i]);
  }
  const std::size_t ip = p.id();
  std::vector<double> y(targets.begin(), targets.end());
  return p.tape()->record({}, {acc / n}, {p},
                          [ip, n, y = std::move(y)](Tape& t, std::size_t self) {
                            const double g = t.grad(self)[0];
                            const auto in = t.data(ip);
                            auto gp = t.grad_mut(ip);
                            for (std::size_t i = 0; i < in.size(); ++i) {
                              gp[i] += g / n *
                                       (-y[i] / in[i] + (1.0 - y[i]) / (1.0 - in[i]));
                            }
                          });
}

double grad_check(const std::function<Value(Tape&, Value)>& f, const Tensor& x,
                  double step) {
  std::vector<double> analytic;
  {
    Tape tape;
    Value in = tape.variable(x);
    Value out = f(tape, in);
    tape.backward(out);
    const auto g = in.grad();
    analytic.assign(g.begin(), g.end());
  }
  auto eval = [&](const Tensor& at) {
    Tape tape;
    return f(tape, tape.constant(at)).item();
  };
  double worst = 0.0;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + step;
    const double up = eval(probe);
    probe[i] = orig - step;
    const double down = eval(probe);
    probe[i] = orig;
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, std::abs(analytic[i] - fd) / (std::abs(fd) + 1e-8));
  }
  return worst;
}

}  // namespace ntlp::diff
