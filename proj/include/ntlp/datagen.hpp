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

// Synthetic event streams with known generating rules.
//
// A pool of rules is sampled once. Each sample draws `rules_per_sample`
// rules from the pool, places event intervals until every drawn rule holds,
// renders detector-like scores, and labels the sample with every pool rule
// the resulting timeline satisfies.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "ntlp/core_types.hpp"
#include "ntlp/oracle.hpp"

namespace ntlp {

struct GenConfig {
  std::uint64_t seed = 0;
  std::size_t num_rules = 100;
  std::size_t max_rule_len = 1;
  std::size_t num_events = 14;
  std::size_t num_objects = 1;
  std::size_t horizon = 150;
  std::size_t rules_per_sample = 1;
  /// Per movement class; event x belongs to class x % size().
  std::vector<double> detection_means = {0.769, 0.882, 0.969};
  double detection_std = 0.02;
  double noise_std = 0.02;
  std::size_t interval_len_min = 5;
  std::size_t interval_len_max = 15;
  std::size_t train_count = 10000;
  std::size_t val_count = 2500;
  std::size_t test_count = 2500;

  /// Throws std::invalid_argument on violated invariants, including a rule
  /// count larger than the unique rule space.
  void validate() const;

  bool operator==(const GenConfig&) const = default;
};

/// Interval placement settings shared by rule sampling and synthesis.
struct Placement {
  std::size_t num_objects = 1;
  std::size_t horizon = 150;
  std::size_t len_min = 5;
  std::size_t len_max = 15;
  std::size_t max_attempts = 1000;

  static Placement from(const GenConfig& cfg);
};

struct Sample {
  EventStream stream;
  LabelVector labels;
  IntervalTimeline timeline;

  bool operator==(const Sample&) const = default;
};

enum class Split { Train = 0, Val = 1, Test = 2 };

struct GeneratedDataset {
  GenConfig config;
  std::vector<std::string> event_names;
  std::vector<Rule> rules;
  std::vector<Sample> train;
  std::vector<Sample> val;
  std::vector<Sample> test;

  const std::vector<Sample>& split(Split s) const;
  std::vector<Sample>& split(Split s);

  bool operator==(const GeneratedDataset&) const = default;
};

/// Default names `<class>_<object>` for the events of a config.
std::vector<std::string> default_event_names(const GenConfig& cfg);

/// Places one occurrence per distinct event of `rule` so that the rule
/// holds, retrying up to placement.max_attempts times. Events used as both
/// arguments of a before/after predicate are instantaneous. On success the
/// occurrences are added to `timeline`; returns false otherwise.
bool place_rule(std::mt19937_64& rng, const Rule& rule,
                const Placement& placement, IntervalTimeline& timeline);

/// Samples `count` rules with lengths uniform in [1, max_len], bodies in
/// canonical form, no two sharing a body, each witnessed satisfiable by
/// place_rule. Throws std::runtime_error after a bounded number of draws.
std::vector<Rule> sample_rules(std::mt19937_64& rng, std::size_t count,
                               std::size_t max_len, std::size_t num_events,
                               const Placement& placement = {});

/// Places every chosen rule, renders scores and labels against `pool`.
/// Throws std::runtime_error naming the rule that could not be placed.
Sample synthesize_sample(std::mt19937_64& rng,
                         std::span<const Rule> chosen_rules,
                         std::span<const Rule> pool, const GenConfig& cfg);

/// Deterministic in cfg.seed; each sample uses its own sub-seed.
GeneratedDataset generate(const GenConfig& cfg);

/// Average number of active labels per sample.
double mean_active_labels(std::span<const Sample> samples);

}  // namespace ntlp
