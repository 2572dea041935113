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

// Reverse-mode differentiation over dense double arrays.
//
// A Tape records primitive applications in creation order, which is always a
// topological order. Values are lightweight handles into the tape. Backward
// walks the record once in reverse and accumulates adjoints, so a value used
// twice receives the sum of both contributions.
//
// Leaves come in three flavours: constants (no gradient), variables (the tape
// owns the gradient) and parameters (data and gradient buffers are borrowed
// from the caller, so several tapes can read one parameter set while writing
// into private gradient buffers).
//
// Non-smooth primitives (min/max reductions, min2/max2, clamp) route the
// adjoint to a single selected element; ties go to the lowest index or the
// first operand.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace ntlp::diff {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);

/// Owning dense array with a shape. Row-major.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);
  static Tensor scalar(double value) { return Tensor({}, {value}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::vector<double>& storage() { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double item() const;

  void fill(double value);

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

class Tape;

/// Handle to a node of a Tape. Cheap to copy; valid while the tape lives.
class Value {
 public:
  Value() = default;

  const Shape& shape() const;
  std::size_t size() const;
  std::span<const double> data() const;
  /// Accumulated adjoint. Empty for values that do not require a gradient.
  std::span<const double> grad() const;
  double item() const;

  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool requires_grad() const;

 private:
  friend class Tape;
  Value(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// A computation record. Single-threaded; distinct tapes are independent.
class Tape {
 public:
  /// Backward rule: reads the node's adjoint and accumulates into parents.
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Value constant(Tensor value);
  Value variable(Tensor value);
  /// Borrows `data` and `grad`; both must outlive the tape and share a shape.
  Value parameter(const Tensor& data, Tensor& grad);

  /// Seeds the scalar `root` with 1 and propagates adjoints.
  void backward(Value root);
  /// Seeds `root` with an explicit adjoint of matching size.
  void backward(Value root, std::span<const double> seed);

  std::size_t size() const { return nodes_.size(); }

  // Primitive-authoring interface.
  Value record(Shape shape, std::vector<double> value,
               std::initializer_list<Value> inputs, Backward backward);
  const Shape& shape(std::size_t id) const { return nodes_[id].shape; }
  std::span<const double> data(std::size_t id) const;
  std::span<const double> grad(std::size_t id) const;
  std::span<double> grad_mut(std::size_t id);
  bool requires_grad(std::size_t id) const { return nodes_[id].needs_grad; }

 private:
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    const double* borrowed_value = nullptr;
    double* borrowed_grad = nullptr;
    bool needs_grad = false;
    Backward backward;
  };

  Value push(Node node);

  std::vector<Node> nodes_;
};

// Elementwise (identical shapes).
Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);
Value div(Value a, Value b);
/// Elementwise minimum; the adjoint goes to `a` on ties.
Value min2(Value a, Value b);
/// Elementwise maximum; the adjoint goes to `a` on ties.
Value max2(Value a, Value b);
Value add_scalar(Value x, double c);
Value scale(Value x, double c);
/// Multiplies every element of x by the scalar value s.
Value scale(Value x, Value s);
/// Gradient passes only where lo < x < hi.
Value clamp(Value x, double lo, double hi);
Value sigmoid(Value x);

/// Constant 0/1 mask of x < threshold; carries no gradient.
Value less_than(Value x, double threshold);

// Reductions.
Value sum(Value x);
Value mean(Value x);
/// Sum of absolute values; subgradient 0 at 0.
Value sum_abs(Value x);
Value dot(Value a, Value b);
/// Minimum over the last axis. Rank-1 input gives a scalar.
Value reduce_min(Value x);
/// Maximum over the last axis. Rank-1 input gives a scalar.
Value reduce_max(Value x);

// Linear maps.
/// x[d] * W[d, m] -> [m].
Value vecmat(Value x, Value w);
/// M[b, j] * a[j] -> [b].
Value matvec(Value m, Value a);

/// Valid strided 1-D correlation along the last axis,
/// out[j] = sum_i x[j * stride + i] * kernel[i].
/// With a rank-1 kernel, x must be rank 1. With a kernel of shape [E, l],
/// x must have shape [..., E, T] and row e of every block uses kernel row e.
/// Output length is (T - l) / stride + 1.
Value conv1d_valid(Value x, Value kernel, std::size_t stride);

/// Softmax over the last axis, computed with max subtraction.
Value softmax(Value x);

// Shape plumbing.
Value reshape(Value x, Shape shape);
/// out[i] = flat(x)[indices[i]]; the adjoint scatter-adds.
Value gather(Value x, std::vector<std::size_t> indices, Shape shape);
/// Repeats x along a new trailing axis of length n.
Value broadcast_last(Value x, std::size_t n);
/// Rank-1 concatenation of the flattened inputs.
Value concat(const std::vector<Value>& parts);
/// Views flat(x) as [groups, block] and sums over groups; output has `shape`.
Value sum_blocks(Value x, Shape shape);

/// Inverted dropout. In training mode each element is zeroed with
/// probability `rate` and survivors are scaled by 1 / (1 - rate); otherwise
/// the identity. Throws std::invalid_argument unless 0 <= rate < 1.
Value dropout(Value x, double rate, std::mt19937_64& rng, bool training);

/// Mean over elements of -[y ln p + (1 - y) ln(1 - p)]; y is constant.
Value binary_cross_entropy(Value p, std::span<const double> targets);

/// Maximum over coordinates of |analytic - central difference| /
/// (|central difference| + 1e-8) for the scalar function f at x.
double grad_check(const std::function<Value(Tape&, Value)>& f,
                  const Tensor& x, double step);

}  // namespace ntlp::diff
