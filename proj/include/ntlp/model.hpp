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

// Temporal predicate network: stream -> pairwise relation matrix -> labels.
//
// Every stage exists in two forms. The tape form records gradients and is
// what training uses; the plain-double helpers mirror single steps and are
// handy for inspection and tests.

#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ntlp/core_types.hpp"
#include "ntlp/diffcore.hpp"
#include "ntlp/oracle.hpp"

namespace ntlp {

struct ModelConfig {
  std::size_t num_objects = 1;
  std::size_t num_events = 14;
  std::size_t horizon = 150;
  std::size_t num_labels = 100;
  std::size_t kernel_len = 3;
  std::size_t stride = 2;
  double epsilon = 0.5;
  double dropout = 0.2;
  /// Threshold the position-scaled row instead of the compressed scores.
  bool literal_indicator = false;
  /// Take the interval end over every position instead of the active ones.
  bool literal_end = false;

  /// Compressed length t = (T - l) / stride + 1.
  std::size_t compressed_len() const;
  std::size_t relation_dim() const { return ntlp::relation_dim(num_events); }
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

inline constexpr double kMinGamma = 1e-3;

struct ModelParams {
  ModelConfig config;
  diff::Tensor kernels;  // [X, l]
  diff::Tensor alpha;    // scalar
  diff::Tensor beta;     // [3]
  diff::Tensor gamma;    // [3]
  diff::Tensor weights;  // [d, R]

  /// alpha = 1, kernel rows 1/l, beta = 0, gamma = 1, W ~ U(0, 0.1).
  static ModelParams initial(const ModelConfig& config, std::mt19937_64& rng);
  /// Deterministic settings: kernel [1], stride 1, alpha = 1, beta = 0,
  /// gamma = 1, eps = 0.5, W = 0, no dropout.
  static ModelParams canonical(std::size_t num_objects, std::size_t num_events,
                               std::size_t horizon, std::size_t num_labels);

  /// alpha and W into [0, 1]; |gamma| >= kMinGamma keeping the sign.
  void project();
  /// Throws std::invalid_argument when tensor shapes disagree with config.
  void check_shapes() const;

  bool operator==(const ModelParams&) const = default;
};

/// Gradient buffers with the shapes of ModelParams.
struct ParamGrads {
  diff::Tensor kernels, alpha, beta, gamma, weights;

  static ParamGrads zeros_like(const ModelParams& params);
  void zero();
  void add(const ParamGrads& other);
};

/// Parameter handles on a tape.
struct ParamValues {
  diff::Value kernels, alpha, beta, gamma, weights;
};

/// Read-only copies; nothing receives a gradient. W is left unbound unless
/// `with_weights` is set, since it is large and the relation pass never
/// needs it.
ParamValues bind_constants(diff::Tape& tape, const ModelParams& params,
                           bool with_weights = false);
/// Leaves that borrow params and accumulate into grads.
ParamValues bind_parameters(diff::Tape& tape, const ModelParams& params,
                            ParamGrads& grads);

/// The stream as a constant [k, X, T] tensor.
diff::Value stream_value(diff::Tape& tape, const EventStream& stream);

/// alpha * conv_1D(stream, K) per event row: [k, X, T] -> [k, X, t].
diff::Value compress(diff::Value stream, diff::Value kernels, diff::Value alpha,
                     std::size_t stride);
/// Multiplies position tau (0-based) by tau + 1.
diff::Value time_index(diff::Value compressed);

struct IntervalValues {
  diff::Value start;  // [k, X]
  diff::Value end;    // [k, X]
};

/// Soft interval bounds per row. The noise indicator is taken on
/// `indicator_source` (M_C normally, M_A for the literal variant). The end
/// is the largest active positional score, or the largest score overall
/// with `literal_end`. A row with no active position then has end 0 and a
/// non-positive duration, so every relation it takes part in is suppressed.
IntervalValues extract_intervals(diff::Value positional,
                                 diff::Value indicator_source, double epsilon,
                                 bool literal_end = false);

/// Suppressed predicate triples for every ordered pair of (object, event)
/// rows, summed over object pairs: [X, X, 3].
diff::Value pairwise_relations(const IntervalValues& intervals,
                               diff::Value beta, diff::Value gamma,
                               std::size_t num_objects, std::size_t num_events);

/// Stream to M_R [X, X, 3].
diff::Value relation_forward(const ParamValues& params,
                             const ModelConfig& config,
                             const EventStream& stream);

/// sigmoid(dropout(vec(M_R)) W): [d] x [d, R] -> [R].
diff::Value predict_labels(diff::Value relations, diff::Value weights,
                           double dropout_rate, bool training,
                           std::mt19937_64& rng);

// Plain-double counterparts.

std::pair<double, double> extract_interval(std::span<const double> row_a,
                                           std::span<const double> row_c,
                                           double epsilon, bool literal_end = false);

/// Order [before, during, after].
std::array<double, 3> predicate_scores(const Interval& u, const Interval& v);

std::array<double, 3> normalize_and_suppress(const std::array<double, 3>& raw,
                                             const Interval& u,
                                             const Interval& v,
                                             const std::array<double, 3>& beta,
                                             const std::array<double, 3>& gamma);

/// vec(M_R) for one stream, length d.
std::vector<double> relation_vector(const ModelParams& params,
                                    const EventStream& stream);

/// Evaluation-mode label probabilities from vec(M_R).
std::vector<double> predict_probabilities(const ModelParams& params,
                                          std::span<const double> relations);

/// Index of the largest of the three scores; ties resolve before, then
/// after, then during, which matches the closed interval convention.
PredicateKind argmax_predicate(std::span<const double> triple);

}  // namespace ntlp
