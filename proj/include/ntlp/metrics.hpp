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

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ntlp/core_types.hpp"

namespace ntlp {

using RankedLists = std::vector<std::vector<Rule>>;

/// 1-based position of the first ranked rule whose body equals truth.
std::optional<std::size_t> rule_rank(std::span<const Rule> ranked, const Rule& truth,
                                     RuleEquality mode = RuleEquality::Canonical);

/// Fraction of labels whose true rule is among the first k of its list.
double hits_at_k(std::span<const std::vector<Rule>> ranked, std::span<const Rule> truth,
                 std::size_t k, RuleEquality mode = RuleEquality::Canonical);

/// Mean of 1 / rank, counting a missing rule as 0.
double mrr(std::span<const std::vector<Rule>> ranked, std::span<const Rule> truth,
           RuleEquality mode = RuleEquality::Canonical);

/// Precision summed at every positive, divided by the number of positives.
/// Samples are ranked by descending score, ties by ascending sample index.
/// Returns nullopt when there is no positive.
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> truth);

struct ApResult {
  double mean_ap = 0.0;
  /// Per label; NaN for skipped labels.
  std::vector<double> per_label;
  /// Labels without a positive sample.
  std::vector<std::size_t> skipped;
};

/// scores[s][r] for sample s and label r.
ApResult mean_average_precision(std::span<const std::vector<double>> scores,
                                std::span<const LabelVector> labels);

struct LengthStats {
  std::size_t labels = 0;
  double hits_at_10 = 0.0;

  bool operator==(const LengthStats&) const = default;
};

struct EvalReport {
  std::string method;
  double hits_at_1 = 0.0;
  double hits_at_5 = 0.0;
  double hits_at_10 = 0.0;
  double mean_ap = 0.0;
  double mrr = 0.0;
  /// Rank of each label's true rule, 0 when absent.
  std::vector<std::size_t> ranks;
  /// Hits@10 split by true rule length.
  std::map<std::size_t, LengthStats> per_length;
  std::size_t evaluated_labels = 0;
  std::vector<std::size_t> skipped_labels;

  /// `key: value` lines.
  std::string to_text() const;

  bool operator==(const EvalReport&) const = default;
};

EvalReport build_report(std::string method, std::span<const std::vector<Rule>> ranked,
                        std::span<const Rule> truth, const ApResult& ap,
                        RuleEquality mode = RuleEquality::Canonical);

}  // namespace ntlp
