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

// Two-stage optimisation. Stage 1 fits the relation network and the label
// projection W; stage 2 freezes them and fits one attention vector per label.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ntlp/core_types.hpp"
#include "ntlp/datagen.hpp"
#include "ntlp/model.hpp"
#include "ntlp/structure.hpp"

namespace ntlp {

struct TrainConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t batch_param = 256;
  std::size_t batch_struct = 64;
  std::size_t epochs_param = 100;
  std::size_t epochs_struct = 1;
  double l1 = 0.1;
  std::uint64_t seed = 0;
  /// Probability clamp for the loss.
  double delta = kDefaultDelta;
  /// Apply the stage-1 dropout rate to cached relations in stage 2.
  bool struct_dropout = false;
  /// Workers for per-sample passes; 0 picks the hardware count.
  std::size_t threads = 1;

  void validate() const;

  bool operator==(const TrainConfig&) const = default;
};

/// Mean over labels of -[y ln p + (1 - y) ln(1 - p)].
double cross_entropy(std::span<const double> predicted, const LabelVector& labels);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update in place. Projection is up to the caller.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const TrainConfig& cfg);

struct OptimizerState {
  AdamState kernels, alpha, beta, gamma, weights;

  bool operator==(const OptimizerState&) const = default;
};

/// Adam on every tensor, then ModelParams::project.
void apply_step(ModelParams& params, const ParamGrads& grads, OptimizerState& state,
                const TrainConfig& cfg);

struct EpochLog {
  std::size_t epoch = 0;
  std::string split;
  double loss = 0.0;
  double seconds = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

struct ParamStageResult {
  ModelParams params;
  std::vector<EpochLog> history;
};

/// Stage-1 objective on a batch: mean cross entropy plus l1 * mean |W|.
/// The gradient is written to `grads`. Sample i of the batch draws its
/// dropout mask from mix_seed(dropout_seed, i), and samples are summed in
/// fixed blocks, so the result does not depend on the worker count.
double param_batch_loss(const ModelParams& params, std::span<const Sample* const> batch,
                        const TrainConfig& cfg, std::uint64_t dropout_seed,
                        ParamGrads& grads, bool training = true);

/// Minibatch training of K, alpha, beta, gamma and W. Shuffles with a
/// permutation derived from cfg.seed and the epoch. Logs a "train" line per
/// epoch and a "val" line when validation samples are given. Throws
/// std::runtime_error on a non-finite loss, naming epoch and batch.
ParamStageResult train_param_stage(std::span<const Sample> train, ModelParams params,
                                   const TrainConfig& cfg,
                                   std::span<const Sample> val = {},
                                   const EpochCallback& on_epoch = {});

/// vec(M_R) for each sample under frozen parameters.
std::vector<std::vector<double>> compute_relations(const ModelParams& params,
                                                   std::span<const Sample> samples,
                                                   std::size_t threads = 1);

/// Label-r cross entropy of one batch and its gradient in the logits.
/// `sums` is [batch, combinations], row-major.
double attention_batch_loss(std::span<const double> sums, std::size_t combinations,
                            std::span<const double> targets, std::span<const double> logits,
                            double delta, std::span<double> grad);

/// Stage 2: fits every head's logits on cached relations; nothing else
/// changes. Labels are independent and may run on separate workers; each
/// sees the same shuffled batch order. `dropout_rate` applies only when
/// cfg.struct_dropout is set.
void train_structure_stage(std::span<const std::vector<double>> relations,
                           std::span<const LabelVector> labels, std::vector<LabelHead>& heads,
                           const TrainConfig& cfg, double dropout_rate = 0.0,
                           const EpochCallback& on_epoch = {});

}  // namespace ntlp
