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

#include "ntlp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace ntlp {

using diff::Shape;
using diff::Tape;
using diff::Tensor;
using diff::Value;

std::size_t ModelConfig::compressed_len() const {
  if (kernel_len == 0 || stride == 0 || kernel_len > horizon) return 0;
  return (horizon - kernel_len) / stride + 1;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("ModelConfig: " + msg);
  };
  if (num_objects < 1 || num_events < 1 || horizon < 1 || num_labels < 1) {
    fail("dimensions must be >= 1");
  }
  if (kernel_len < 1) fail("kernel_len must be >= 1");
  if (stride < 1) fail("stride must be >= 1");
  if (kernel_len > horizon) {
    fail(fmt::format("kernel_len {} exceeds horizon {}", kernel_len, horizon));
  }
  if (!std::isfinite(epsilon)) fail("epsilon must be finite");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
}

ModelParams ModelParams::initial(const ModelConfig& config, std::mt19937_64& rng) {
  config.validate();
  ModelParams p;
  p.config = config;
  p.kernels = Tensor({config.num_events, config.kernel_len},
                     1.0 / static_cast<double>(config.kernel_len));
  p.alpha = Tensor::scalar(1.0);
  p.beta = Tensor({kNumPredicateKinds}, 0.0);
  p.gamma = Tensor({kNumPredicateKinds}, 1.0);
  p.weights = Tensor({config.relation_dim(), config.num_labels});
  std::uniform_real_distribution<double> init(0.0, 0.1);
  for (double& w : p.weights.values()) w = init(rng);
  return p;
}

ModelParams ModelParams::canonical(std::size_t num_objects, std::size_t num_events,
                                   std::size_t horizon, std::size_t num_labels) {
  ModelConfig config;
  config.num_objects = num_objects;
  config.num_events = num_events;
  config.horizon = horizon;
  config.num_labels = num_labels;
  config.kernel_len = 1;
  config.stride = 1;
  config.epsilon = 0.5;
  config.dropout = 0.0;
  config.validate();
  ModelParams p;
  p.config = config;
  p.kernels = Tensor({num_events, 1}, 1.0);
  p.alpha = Tensor::scalar(1.0);
  p.beta = Tensor({kNumPredicateKinds}, 0.0);
  p.gamma = Tensor({kNumPredicateKinds}, 1.0);
  p.weights = Tensor({config.relation_dim(), num_labels}, 0.0);
  return p;
}

void ModelParams::project() {
  for (double& a : alpha.values()) a = std::clamp(a, 0.0, 1.0);
  for (double& w : weights.values()) w = std::clamp(w, 0.0, 1.0);
  for (double& g : gamma.values()) {
    if (std::abs(g) < kMinGamma) g = g < 0.0 ? -kMinGamma : kMinGamma;
  }
}

void ModelParams::check_shapes() const {
  config.validate();
  auto expect = [](const char* name, const Tensor& t, const Shape& shape) {
    if (t.shape() != shape) {
      throw std::invalid_argument(fmt::format("ModelParams: {} has shape {}, expected {}",
                                              name, t.shape(), shape));
    }
  };
  expect("kernels", kernels, {config.num_events, config.kernel_len});
  expect("alpha", alpha, {});
  expect("beta", beta, {kNumPredicateKinds});
  expect("gamma", gamma, {kNumPredicateKinds});
  expect("weights", weights, {config.relation_dim(), config.num_labels});
}

ParamGrads ParamGrads::zeros_like(const ModelParams& params) {
  return {Tensor(params.kernels.shape()), Tensor(params.alpha.shape()),
          Tensor(params.beta.shape()), Tensor(params.gamma.shape()),
          Tensor(params.weights.shape())};
}

void ParamGrads::zero() {
  for (Tensor* t : {&kernels, &alpha, &beta, &gamma, &weights}) t->fill(0.0);
}

void ParamGrads::add(const ParamGrads& other) {
  auto acc = [](Tensor& dst, const Tensor& src) {
    auto d = dst.values();
    auto s = src.values();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
  };
  acc(kernels, other.kernels);
  acc(alpha, other.alpha);
  acc(beta, other.beta);
  acc(gamma, other.gamma);
  acc(weights, other.weights);
}

ParamValues bind_constants(Tape& tape, const ModelParams& params, bool with_weights) {
  ParamValues v{tape.constant(params.kernels), tape.constant(params.alpha),
                tape.constant(params.beta), tape.constant(params.gamma), Value{}};
  if (with_weights) v.weights = tape.constant(params.weights);
  return v;
}

ParamValues bind_parameters(Tape& tape, const ModelParams& params, ParamGrads& grads) {
  return {tape.parameter(params.kernels, grads.kernels),
          tape.parameter(params.alpha, grads.alpha),
          tape.parameter(params.beta, grads.beta),
          tape.parameter(params.gamma, grads.gamma),
          tape.parameter(params.weights, grads.weights)};
}

Value stream_value(Tape& tape, const EventStream& stream) {
  const auto s = stream.scores();
  return tape.constant(
      Tensor({stream.num_objects(), stream.num_events(), stream.horizon()},
             std::vector<double>(s.begin(), s.end())));
}

Value compress(Value stream, Value kernels, Value alpha, std::size_t stride) {
  return diff::scale(diff::conv1d_valid(stream, kernels, stride), alpha);
}

Value time_index(Value compressed) {
  const Shape& shape = compressed.shape();
  if (shape.empty()) throw std::invalid_argument("time_index: scalar input");
  const std::size_t t = shape.back();
  std::vector<double> pos(compressed.size());
  for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = static_cast<double>(i % t + 1);
  return diff::mul(compressed, compressed.tape()->constant(Tensor(shape, std::move(pos))));
}

IntervalValues extract_intervals(Value positional, Value indicator_source, double epsilon,
                                 bool literal_end) {
  if (positional.shape() != indicator_source.shape() || positional.shape().empty()) {
    throw std::invalid_argument("extract_intervals: shape mismatch");
  }
  const std::size_t t = positional.shape().back();
  const Value indicator = diff::less_than(indicator_source, epsilon);
  const Value row_max = diff::reduce_max(positional);
  const Value mask =
      diff::mul(diff::broadcast_last(diff::add_scalar(row_max, epsilon), t), indicator);
  const Value start = diff::sub(diff::reduce_min(diff::add(positional, mask)),
                                diff::reduce_min(mask));
  if (literal_end) return {start, row_max};
  std::vector<double> active(indicator.size());
  const auto ind = indicator.data();
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = 1.0 - ind[i];
  const Value kept = diff::mul(
      positional, positional.tape()->constant(Tensor(positional.shape(), std::move(active))));
  return {start, diff::reduce_max(kept)};
}

Value pairwise_relations(const IntervalValues& intervals, Value beta, Value gamma,
                         std::size_t num_objects, std::size_t num_events) {
  const std::size_t rows = num_objects * num_events;
  if (intervals.start.size() != rows || intervals.end.size() != rows) {
    throw std::invalid_argument("pairwise_relations: interval count mismatch");
  }
  // Pairs enumerate (object i, object j, event u, event v) so that summing
  // leading blocks marginalises the objects.
  const std::size_t pairs = rows * rows;
  std::vector<std::size_t> ia, ib;
  ia.reserve(pairs);
  ib.reserve(pairs);
  for (std::size_t i = 0; i < num_objects; ++i) {
    for (std::size_t j = 0; j < num_objects; ++j) {
      for (std::size_t u = 0; u < num_events; ++u) {
        for (std::size_t v = 0; v < num_events; ++v) {
          ia.push_back(i * num_events + u);
          ib.push_back(j * num_events + v);
        }
      }
    }
  }
  const Value us = diff::gather(intervals.start, ia, {pairs});
  const Value ue = diff::gather(intervals.end, ia, {pairs});
  const Value vs = diff::gather(intervals.start, ib, {pairs});
  const Value ve = diff::gather(intervals.end, ib, {pairs});

  const Value before = diff::sub(vs, ue);
  const Value during = diff::min2(diff::sub(ve, us), diff::sub(ue, vs));
  const Value after = diff::sub(us, ve);

  constexpr std::size_t K = kNumPredicateKinds;
  std::vector<std::size_t> interleave(pairs * K), kinds(pairs * K);
  for (std::size_t p = 0; p < pairs; ++p) {
    for (std::size_t k = 0; k < K; ++k) {
      interleave[p * K + k] = k * pairs + p;
      kinds[p * K + k] = k;
    }
  }
  const Value raw =
      diff::gather(diff::concat({before, during, after}), std::move(interleave), {pairs, K});
  const Value shift = diff::gather(beta, kinds, {pairs, K});
  const Value width = diff::gather(gamma, std::move(kinds), {pairs, K});
  const Value probs = diff::softmax(diff::div(diff::sub(raw, shift), width));

  const Value supp = diff::min2(diff::sub(ue, us), diff::sub(ve, vs));
  const Value suppressed = diff::min2(probs, diff::broadcast_last(supp, K));
  return diff::sum_blocks(suppressed, {num_events, num_events, K});
}

Value relation_forward(const ParamValues& params, const ModelConfig& config,
                       const EventStream& stream) {
  if (stream.num_objects() != config.num_objects ||
      stream.num_events() != config.num_events || stream.horizon() != config.horizon) {
    throw std::invalid_argument(fmt::format(
        "relation_forward: stream is [{}, {}, {}], model expects [{}, {}, {}]",
        stream.num_objects(), stream.num_events(), stream.horizon(), config.num_objects,
        config.num_events, config.horizon));
  }
  Tape& tape = *params.kernels.tape();
  const Value compressed =
      compress(stream_value(tape, stream), params.kernels, params.alpha, config.stride);
  const Value positional = time_index(compressed);
  const IntervalValues iv = extract_intervals(
      positional, config.literal_indicator ? positional : compressed, config.epsilon,
      config.literal_end);
  return pairwise_relations(iv, params.beta, params.gamma, config.num_objects,
                            config.num_events);
}

Value predict_labels(Value relations, Value weights, double dropout_rate, bool training,
                     std::mt19937_64& rng) {
  const std::size_t d = relations.size();
  if (weights.shape().size() != 2 || weights.shape()[0] != d) {
    throw std::invalid_argument(fmt::format(
        "predict_labels: relation vector of size {} does not match W {}", d,
        weights.shape()));
  }
  const Value flat = diff::reshape(relations, {d});
  return diff::sigmoid(
      diff::vecmat(diff::dropout(flat, dropout_rate, rng, training), weights));
}

std::pair<double, double> extract_interval(std::span<const double> row_a,
                                           std::span<const double> row_c,
                                           double epsilon, bool literal_end) {
  if (row_a.empty() || row_a.size() != row_c.size()) {
    throw std::invalid_argument("extract_interval: rows must be equal and nonempty");
  }
  const double top = *std::max_element(row_a.begin(), row_a.end());
  double lo = std::numeric_limits<double>::infinity();
  double mask_lo = std::numeric_limits<double>::infinity();
  double active_top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < row_a.size(); ++i) {
    const bool noise = row_c[i] < epsilon;
    const double mask = noise ? top + epsilon : 0.0;
    lo = std::min(lo, row_a[i] + mask);
    mask_lo = std::min(mask_lo, mask);
    active_top = std::max(active_top, noise ? 0.0 : row_a[i]);
  }
  return {lo - mask_lo, literal_end ? top : active_top};
}

std::array<double, 3> predicate_scores(const Interval& u, const Interval& v) {
  return {v.start - u.end, std::min(v.end - u.start, u.end - v.start),
          u.start - v.end};
}

std::array<double, 3> normalize_and_suppress(const std::array<double, 3>& raw,
                                             const Interval& u, const Interval& v,
                                             const std::array<double, 3>& beta,
                                             const std::array<double, 3>& gamma) {
  std::array<double, 3> z{};
  for (std::size_t i = 0; i < 3; ++i) z[i] = (raw[i] - beta[i]) / gamma[i];
  const double top = std::max({z[0], z[1], z[2]});
  double total = 0.0;
  for (double& e : z) {
    e = std::exp(e - top);
    total += e;
  }
  const double supp = std::min(u.length(), v.length());
  for (double& e : z) e = std::min(e / total, supp);
  return z;
}

std::vector<double> relation_vector(const ModelParams& params, const EventStream& stream) {
  Tape tape;
  const ParamValues pv = bind_constants(tape, params);
  const Value rel = relation_forward(pv, params.config, stream);
  const auto d = rel.data();
  return {d.begin(), d.end()};
}

std::vector<double> predict_probabilities(const ModelParams& params,
                                          std::span<const double> relations) {
  const std::size_t d = params.weights.shape().at(0), m = params.weights.shape().at(1);
  if (relations.size() != d) {
    throw std::invalid_argument(fmt::format(
        "predict_probabilities: relation vector of size {} does not match W [{}, {}]",
        relations.size(), d, m));
  }
  const auto w = params.weights.values();
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double xi = relations[i];
    if (xi == 0.0) continue;
    const double* row = w.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) out[j] += xi * row[j];
  }
  for (double& o : out) o = 1.0 / (1.0 + std::exp(-o));
  return out;
}

PredicateKind argmax_predicate(std::span<const double> triple) {
  if (triple.size() != kNumPredicateKinds) {
    throw std::invalid_argument("argmax_predicate: expected three scores");
  }
  PredicateKind best = PredicateKind::Before;
  for (PredicateKind k : {PredicateKind::After, PredicateKind::During}) {
    if (triple[static_cast<std::size_t>(k)] > triple[static_cast<std::size_t>(best)]) {
      best = k;
    }
  }
  return best;
}

}  // namespace ntlp
