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

// Run configuration: flat `key = value` text, `#` starts a comment. Every
// key has a default and an unknown key is an error.

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ntlp/datagen.hpp"
#include "ntlp/model.hpp"
#include "ntlp/training.hpp"

namespace ntlp {

struct RunConfig {
  GenConfig gen;
  TrainConfig train;
  /// Hyperparameters only; shapes come from the dataset.
  ModelConfig model;
  /// Candidate count c per maximum rule length, n = 1, 2, ...
  std::vector<std::size_t> candidates = {100, 100, 30, 25};
  /// Longest rule searched; 0 uses the dataset's max_rule_len.
  std::size_t n_max = 0;
  /// Presence threshold of the count baseline.
  double presence = 0.5;
  /// Rules written per label by `induce`.
  std::size_t top_k = 10;
  /// Rules ranked per label when computing Hits@k and MRR.
  std::size_t rank_depth = 100;
  /// Compare rules as exact predicate sets instead of canonical ones.
  bool strict_rules = false;
  /// Skip canonical duplicates when ranking.
  bool distinct_rules = true;
  std::string dataset;
  std::string checkpoint;
  std::string out = ".";
  /// full, map
  std::string stage = "full";

  /// The c used for rule length n.
  std::size_t candidates_for(std::size_t n) const;
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

/// Every key, in the order `to_text` writes them.
std::vector<std::string> config_keys();

/// Sets one key from its text form. Throws std::invalid_argument for an
/// unknown key or a malformed value.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

/// Throws std::invalid_argument naming the line on any error.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Every key with its current value; parse_config reads it back unchanged.
std::string to_text(const RunConfig& cfg);

}  // namespace ntlp
