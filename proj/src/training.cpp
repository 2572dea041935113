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

#include "ntlp/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "ntlp/parallel.hpp"

namespace ntlp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t worker_count(const TrainConfig& cfg) {
  return cfg.threads == 0 ? default_threads() : cfg.threads;
}

std::vector<double> as_targets(const LabelVector& labels) {
  return {labels.bits.begin(), labels.bits.end()};
}

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

double eval_loss(const ModelParams& params, std::span<const Sample> samples,
                 const TrainConfig& cfg) {
  const auto relations = compute_relations(params, samples, worker_count(cfg));
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto probs = predict_probabilities(params, relations[i]);
    for (double& p : probs) p = std::clamp(p, cfg.delta, 1.0 - cfg.delta);
    total += cross_entropy(probs, samples[i].labels);
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("TrainConfig: " + msg);
  };
  if (!(lr > 0.0)) fail("lr must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) fail("adam_eps must be > 0");
  if (batch_param < 1 || batch_struct < 1) fail("batch sizes must be >= 1");
  if (!(l1 >= 0.0)) fail("l1 must be >= 0");
  if (!(delta > 0.0 && delta < 0.5)) fail("delta must lie in (0, 0.5)");
}

double cross_entropy(std::span<const double> predicted, const LabelVector& labels) {
  if (predicted.size() != labels.size() || predicted.empty()) {
    throw std::invalid_argument(fmt::format("cross_entropy: {} predictions for {} labels",
                                            predicted.size(), labels.size()));
  }
  double acc = 0.0;
  for (std::size_t r = 0; r < predicted.size(); ++r) {
    acc -= labels.test(r) ? std::log(predicted[r]) : std::log(1.0 - predicted[r]);
  }
  return acc / static_cast<double>(predicted.size());
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& cfg) {
  if (grads.size() != params.size()) {
    throw std::invalid_argument("adam_step: gradient size mismatch");
  }
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(params.size(), 0.0);
    state.v.assign(params.size(), 0.0);
  }
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw std::invalid_argument("adam_step: moment size mismatch");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    params[i] -= cfg.lr * (state.m[i] / c1) / (std::sqrt(state.v[i] / c2) + cfg.adam_eps);
  }
}

void apply_step(ModelParams& params, const ParamGrads& grads, OptimizerState& state,
                const TrainConfig& cfg) {
  adam_step(params.kernels.values(), grads.kernels.values(), state.kernels, cfg);
  adam_step(params.alpha.values(), grads.alpha.values(), state.alpha, cfg);
  adam_step(params.beta.values(), grads.beta.values(), state.beta, cfg);
  adam_step(params.gamma.values(), grads.gamma.values(), state.gamma, cfg);
  adam_step(params.weights.values(), grads.weights.values(), state.weights, cfg);
  params.project();
}

double param_batch_loss(const ModelParams& params, std::span<const Sample* const> batch,
                        const TrainConfig& cfg, std::uint64_t dropout_seed,
                        ParamGrads& grads, bool training) {
  if (batch.empty()) throw std::invalid_argument("param_batch_loss: empty batch");
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  // Samples are summed in fixed blocks merged in block order, so the result
  // is the same for every worker count.
  constexpr std::size_t kBlock = 16;
  const std::size_t blocks = (batch.size() + kBlock - 1) / kBlock;
  const std::size_t workers = std::min(worker_count(cfg), blocks);
  std::vector<ParamGrads> partial(blocks, ParamGrads::zeros_like(params));
  std::vector<double> losses(blocks, 0.0);

  parallel_chunks(blocks, workers, [&](std::size_t, std::size_t first, std::size_t last) {
    for (std::size_t b = first; b < last; ++b) {
      for (std::size_t i = b * kBlock; i < std::min(batch.size(), (b + 1) * kBlock); ++i) {
        const Sample& sample = *batch[i];
        diff::Tape tape;
        const ParamValues pv = bind_parameters(tape, params, partial[b]);
        const diff::Value rel = relation_forward(pv, params.config, sample.stream);
        std::mt19937_64 rng(mix_seed(dropout_seed, i));
        const diff::Value probs = diff::clamp(
            predict_labels(rel, pv.weights, params.config.dropout, training, rng), cfg.delta,
            1.0 - cfg.delta);
        const diff::Value ce = diff::binary_cross_entropy(probs, as_targets(sample.labels));
        tape.backward(diff::scale(ce, inv_batch));
        losses[b] += ce.item();
      }
    }
  });

  grads.zero();
  double loss = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    grads.add(partial[b]);
    loss += losses[b];
  }
  loss *= inv_batch;

  if (cfg.l1 > 0.0) {
    const auto wv = params.weights.values();
    auto gw = grads.weights.values();
    const double scale = cfg.l1 / static_cast<double>(wv.size());
    double l1 = 0.0;
    for (std::size_t i = 0; i < wv.size(); ++i) {
      l1 += std::abs(wv[i]);
      if (wv[i] > 0.0) gw[i] += scale;
      if (wv[i] < 0.0) gw[i] -= scale;
    }
    loss += scale * l1;
  }
  return loss;
}

ParamStageResult train_param_stage(std::span<const Sample> train, ModelParams params,
                                   const TrainConfig& cfg, std::span<const Sample> val,
                                   const EpochCallback& on_epoch) {
  cfg.validate();
  params.check_shapes();
  if (train.empty()) throw std::invalid_argument("train_param_stage: empty dataset");

  ParamStageResult result;
  OptimizerState state;
  ParamGrads grads = ParamGrads::zeros_like(params);
  const std::size_t batches = (train.size() + cfg.batch_param - 1) / cfg.batch_param;
  std::vector<const Sample*> batch;

  auto emit = [&](EpochLog log) {
    if (on_epoch) on_epoch(log);
    result.history.push_back(std::move(log));
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs_param; ++epoch) {
    const auto t0 = Clock::now();
    const auto order = shuffled(train.size(), mix_seed(cfg.seed, 1, epoch));
    double total = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t begin = b * cfg.batch_param;
      const std::size_t end = std::min(train.size(), begin + cfg.batch_param);
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) batch.push_back(&train[order[i]]);
      const double loss = param_batch_loss(params, batch, cfg,
                                           mix_seed(cfg.seed, 2, epoch * batches + b), grads);
      if (!std::isfinite(loss)) {
        throw std::runtime_error(fmt::format(
            "train_param_stage: non-finite loss {} at epoch {} batch {}", loss, epoch, b));
      }
      total += loss * static_cast<double>(end - begin);
      apply_step(params, grads, state, cfg);
    }
    emit({epoch, "train", total / static_cast<double>(train.size()), seconds_since(t0)});
    if (!val.empty()) {
      const auto t1 = Clock::now();
      emit({epoch, "val", eval_loss(params, val, cfg), seconds_since(t1)});
    }
  }
  result.params = std::move(params);
  return result;
}

std::vector<std::vector<double>> compute_relations(const ModelParams& params,
                                                   std::span<const Sample> samples,
                                                   std::size_t threads) {
  std::vector<std::vector<double>> out(samples.size());
  parallel_chunks(samples.size(), threads == 0 ? default_threads() : threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      out[i] = relation_vector(params, samples[i].stream);
                    }
                  });
  return out;
}

double attention_batch_loss(std::span<const double> sums, std::size_t combinations,
                            std::span<const double> targets, std::span<const double> logits,
                            double delta, std::span<double> grad) {
  const std::size_t batch = targets.size();
  if (logits.size() != combinations || grad.size() != combinations ||
      sums.size() != batch * combinations || batch == 0) {
    throw std::invalid_argument("attention_batch_loss: size mismatch");
  }
  const auto attention = softmax(logits);
  std::fill(grad.begin(), grad.end(), 0.0);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  double loss = 0.0;
  for (std::size_t b = 0; b < batch; ++b) {
    const double* row = sums.data() + b * combinations;
    double raw = 0.0;
    for (std::size_t j = 0; j < combinations; ++j) raw += attention[j] * row[j];
    const double p = std::clamp(raw, delta, 1.0 - delta);
    const double y = targets[b];
    loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    if (raw <= delta || raw >= 1.0 - delta) continue;
    const double coef = inv_batch * (p - y) / (p * (1.0 - p));
    for (std::size_t j = 0; j < combinations; ++j) {
      grad[j] += coef * attention[j] * (row[j] - raw);
    }
  }
  return loss * inv_batch;
}

void train_structure_stage(std::span<const std::vector<double>> relations,
                           std::span<const LabelVector> labels, std::vector<LabelHead>& heads,
                           const TrainConfig& cfg, double dropout_rate,
                           const EpochCallback& on_epoch) {
  cfg.validate();
  if (relations.size() != labels.size()) {
    throw std::invalid_argument("train_structure_stage: relations and labels differ in count");
  }
  if (cfg.epochs_struct == 0 || heads.empty()) return;
  if (relations.empty()) throw std::invalid_argument("train_structure_stage: empty dataset");
  for (const auto& y : labels) {
    if (y.size() < heads.size()) {
      throw std::invalid_argument("train_structure_stage: label vector shorter than heads");
    }
  }
  const bool drop = cfg.struct_dropout && dropout_rate > 0.0;
  if (drop && !(dropout_rate < 1.0)) {
    throw std::invalid_argument("train_structure_stage: dropout rate must be < 1");
  }

  const std::size_t n = relations.size();
  std::vector<std::vector<std::size_t>> orders;
  for (std::size_t e = 0; e < cfg.epochs_struct; ++e) {
    orders.push_back(shuffled(n, mix_seed(cfg.seed, 3, e)));
  }
  std::vector<std::vector<double>> epoch_loss(heads.size(),
                                              std::vector<double>(cfg.epochs_struct, 0.0));
  std::vector<double> epoch_seconds(cfg.epochs_struct, 0.0);
  const std::size_t workers = std::min(worker_count(cfg), heads.size());
  std::vector<std::vector<double>> worker_seconds(
      workers, std::vector<double>(cfg.epochs_struct, 0.0));

  parallel_chunks(heads.size(), workers, [&](std::size_t w, std::size_t begin,
                                             std::size_t end) {
    std::vector<double> sums, targets, grad, dropped;
    for (std::size_t r = begin; r < end; ++r) {
      LabelHead& head = heads[r];
      const std::size_t J = head.space.size();
      if (head.logits.size() != J) {
        throw std::invalid_argument(fmt::format(
            "train_structure_stage: label {} has {} logits for {} combinations", r,
            head.logits.size(), J));
      }
      AdamState state;
      grad.assign(J, 0.0);
      for (std::size_t e = 0; e < cfg.epochs_struct; ++e) {
        const auto t0 = Clock::now();
        double total = 0.0;
        for (std::size_t b0 = 0; b0 < n; b0 += cfg.batch_struct) {
          const std::size_t b1 = std::min(n, b0 + cfg.batch_struct);
          sums.resize((b1 - b0) * J);
          targets.resize(b1 - b0);
          for (std::size_t i = b0; i < b1; ++i) {
            const std::size_t s = orders[e][i];
            std::span<const double> rel = relations[s];
            if (drop) {
              std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed, 4, e), r, s));
              std::bernoulli_distribution keep(1.0 - dropout_rate);
              dropped.resize(rel.size());
              for (std::size_t k = 0; k < rel.size(); ++k) {
                dropped[k] = keep(rng) ? rel[k] / (1.0 - dropout_rate) : 0.0;
              }
              rel = dropped;
            }
            head.space.combination_sums(rel, std::span<double>(sums).subspan((i - b0) * J, J));
            targets[i - b0] = labels[s].test(r) ? 1.0 : 0.0;
          }
          const double loss =
              attention_batch_loss(sums, J, targets, head.logits, cfg.delta, grad);
          if (!std::isfinite(loss)) {
            throw std::runtime_error(fmt::format(
                "train_structure_stage: non-finite loss for label {} at epoch {} batch {}", r,
                e, b0 / cfg.batch_struct));
          }
          total += loss * static_cast<double>(b1 - b0);
          adam_step(head.logits, grad, state, cfg);
        }
        epoch_loss[r][e] = total / static_cast<double>(n);
        worker_seconds[w][e] += seconds_since(t0);
      }
    }
  });

  for (std::size_t e = 0; e < cfg.epochs_struct; ++e) {
    double total = 0.0, secs = 0.0;
    for (const auto& l : epoch_loss) total += l[e];
    for (const auto& ws : worker_seconds) secs = std::max(secs, ws[e]);
    if (on_epoch) on_epoch({e, "struct", total / static_cast<double>(heads.size()), secs});
  }
}

}  // namespace ntlp
