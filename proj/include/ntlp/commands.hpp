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

// Experiment runner behind the `ntlp` tool. The in-memory helpers do the
// work; the cmd_* wrappers add file IO and printing.

#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ntlp/config.hpp"
#include "ntlp/datagen.hpp"
#include "ntlp/formats.hpp"
#include "ntlp/metrics.hpp"
#include "ntlp/model.hpp"
#include "ntlp/training.hpp"

namespace ntlp {

/// Model shapes from the dataset, hyperparameters from the run config.
ModelConfig model_config_for(const GenConfig& gen, const RunConfig& cfg);

/// Training settings with the run seed applied.
TrainConfig train_config_for(const RunConfig& cfg);

/// Longest rule searched: n_max, or the dataset's max_rule_len when 0.
std::size_t search_length(const GenConfig& gen, const RunConfig& cfg);

/// Runs both stages for cfg.stage = "full", or the count baseline for
/// "map". A given stage-1 checkpoint skips parameter learning.
Checkpoint train_checkpoint(const GeneratedDataset& ds, const RunConfig& cfg,
                            const std::optional<ModelParams>& stage1 = std::nullopt,
                            const EpochCallback& on_epoch = {});

/// Throws std::invalid_argument when the checkpoint and dataset shapes
/// differ; the message shows both.
void check_compatible(const Checkpoint& ckpt, const GenConfig& gen);

/// Per-label ranked rules from the trained heads. Throws
/// std::invalid_argument when the checkpoint has no stage-2 state.
std::vector<std::vector<RankedRule>> ranked_rules(const Checkpoint& ckpt, std::size_t depth,
                                                  bool distinct);

/// Per-sample label scores on a split: f_phi for the model, the constant
/// prediction for the count baseline.
std::vector<std::vector<double>> label_scores(const Checkpoint& ckpt,
                                              std::span<const Sample> samples,
                                              std::size_t threads = 1);

EvalReport evaluate(const Checkpoint& ckpt, const GeneratedDataset& ds, const RunConfig& cfg);

/// Rule text for the top `k` rules of every label.
std::string rules_text(const Checkpoint& ckpt, std::size_t k, bool distinct,
                       std::span<const std::string> event_names);

// Commands. Each prints a short summary to `out`.

GeneratedDataset cmd_gen(const RunConfig& cfg, std::ostream& out);
Checkpoint cmd_train(const RunConfig& cfg, std::ostream& out);
std::string cmd_induce(const RunConfig& cfg, std::ostream& out);
EvalReport cmd_eval(const RunConfig& cfg, std::ostream& out);
void cmd_inspect(const RunConfig& cfg, std::ostream& out);

}  // namespace ntlp
