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

// Rule search over combinations of a label's strongest predicates.
//
// A label keeps c candidate slots of vec(M_R), every combination of 1..n of
// them, and an attention logit per combination. The rule is the
// combination with the largest logit.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ntlp/core_types.hpp"
#include "ntlp/diffcore.hpp"

namespace ntlp {

inline constexpr double kDefaultDelta = 1e-6;

struct CandidateSet {
  std::size_t label = 0;
  /// Flat vec(M_R) indices, strongest weight first.
  std::vector<std::size_t> indices;

  bool operator==(const CandidateSet&) const = default;
};

/// The c largest entries of one weight column; equal weights keep the
/// lower index first.
CandidateSet select_candidates(std::span<const double> column, std::size_t label,
                               std::size_t count);
/// Same, reading column `label` of W [d, R].
CandidateSet select_candidates(const diff::Tensor& weights, std::size_t label,
                               std::size_t count);

/// Candidate count c used for a given maximum rule length: 100, 100, 30, 25
/// for n = 1..4 and 25 beyond.
std::size_t default_candidate_count(std::size_t max_len);

/// Number of combinations of sizes 1..n drawn from c items. Saturates at
/// SIZE_MAX instead of overflowing.
std::size_t combination_count(std::size_t c, std::size_t max_len);

/// All combinations of sizes 1..n of a candidate list, stored as
/// concatenated index lists. Combinations are ordered by size, then
/// lexicographically by candidate position; indices inside one combination
/// follow candidate order.
class CombinationSpace {
 public:
  CombinationSpace() = default;
  CombinationSpace(const CandidateSet& candidates, std::size_t max_len,
                   std::size_t num_events);

  std::size_t label() const { return label_; }
  std::size_t max_len() const { return max_len_; }
  std::size_t num_events() const { return num_events_; }
  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const std::size_t> combination(std::size_t j) const {
    return {indices_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
  }
  /// Stored index entries; sum over i of i * C(c, i).
  std::size_t index_entries() const { return indices_.size(); }

  /// out[j] = sum of relations over combination j.
  void combination_sums(std::span<const double> relations, std::span<double> out) const;

  /// The combination decoded into grounded predicates.
  Rule decode(std::size_t j) const;

 private:
  std::size_t label_ = 0;
  std::size_t max_len_ = 0;
  std::size_t num_events_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> indices_;
};

/// Candidates, their combinations and the attention logits s of one label.
struct LabelHead {
  CandidateSet candidates;
  CombinationSpace space;
  std::vector<double> logits;
};

/// One head per label from the columns of W; logits start at zero.
std::vector<LabelHead> build_heads(const diff::Tensor& weights, std::size_t max_len,
                                   std::size_t candidate_count, std::size_t num_events);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

/// clamp(sum_j softmax(s)_j * sum(combination j), delta, 1 - delta).
double score_label(std::span<const double> relations, const CombinationSpace& space,
                   std::span<const double> logits, double delta = kDefaultDelta);
/// The same on a tape, differentiable in the logits; `sums` holds the
/// per-combination relation sums.
diff::Value score_label(diff::Value sums, diff::Value logits, double delta = kDefaultDelta);

/// Rule at argmax s (lowest index on ties).
Rule induce_rule(std::span<const double> logits, const CombinationSpace& space);

struct RankedRule {
  Rule rule;
  double attention = 0.0;
  std::size_t combination = 0;
};

/// Top-k combinations by attention, ties to the lower index. With
/// `distinct` set, a combination whose canonical body repeats an earlier
/// one is skipped.
std::vector<RankedRule> rank_rules(std::span<const double> logits,
                                   const CombinationSpace& space, std::size_t k,
                                   bool distinct = false);

}  // namespace ntlp
