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

#include "ntlp/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace ntlp {

namespace {

// Refuse spaces that would not fit in memory long before allocating them.
constexpr std::size_t kMaxCombinations = std::size_t{1} << 26;

}  // namespace

CandidateSet select_candidates(std::span<const double> column, std::size_t label,
                               std::size_t count) {
  if (count > column.size()) {
    throw std::invalid_argument(fmt::format(
        "select_candidates: c = {} exceeds d = {}", count, column.size()));
  }
  std::vector<std::size_t> order(column.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return column[a] > column[b]; });
  order.resize(count);
  return {label, std::move(order)};
}

CandidateSet select_candidates(const diff::Tensor& weights, std::size_t label,
                               std::size_t count) {
  if (weights.rank() != 2 || label >= weights.shape()[1]) {
    throw std::invalid_argument("select_candidates: label outside W");
  }
  const std::size_t d = weights.shape()[0], m = weights.shape()[1];
  std::vector<double> column(d);
  for (std::size_t i = 0; i < d; ++i) column[i] = weights[i * m + label];
  return select_candidates(column, label, count);
}

std::size_t default_candidate_count(std::size_t max_len) {
  static constexpr std::size_t kCounts[] = {100, 100, 30, 25};
  if (max_len == 0) throw std::invalid_argument("default_candidate_count: n must be >= 1");
  return max_len <= 4 ? kCounts[max_len - 1] : 25;
}

std::size_t combination_count(std::size_t c, std::size_t max_len) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  std::size_t binom = 1;  // C(c, i - 1)
  for (std::size_t i = 1; i <= std::min(c, max_len); ++i) {
    // C(c, i) = C(c, i - 1) * (c - i + 1) / i; the product stays exact
    // because C(c, i - 1) * (c - i + 1) is divisible by i.
    const std::size_t factor = c - i + 1;
    if (binom > kMax / factor) return kMax;
    binom = binom * factor / i;
    if (total > kMax - binom) return kMax;
    total += binom;
  }
  return total;
}

CombinationSpace::CombinationSpace(const CandidateSet& candidates, std::size_t max_len,
                                   std::size_t num_events)
    : label_(candidates.label), max_len_(max_len), num_events_(num_events) {
  if (max_len == 0) throw std::invalid_argument("CombinationSpace: n must be >= 1");
  const std::size_t c = candidates.indices.size();
  const std::size_t total = combination_count(c, max_len);
  if (total > kMaxCombinations) {
    throw std::length_error(fmt::format(
        "CombinationSpace: {} combinations for c = {}, n = {} is too many", total, c,
        max_len));
  }
  offsets_.reserve(total + 1);
  offsets_.push_back(0);
  std::vector<std::size_t> pos;
  for (std::size_t size = 1; size <= std::min(c, max_len); ++size) {
    pos.resize(size);
    std::iota(pos.begin(), pos.end(), std::size_t{0});
    while (true) {
      for (std::size_t p : pos) indices_.push_back(candidates.indices[p]);
      offsets_.push_back(indices_.size());
      // Advance to the next lexicographic combination of positions.
      std::size_t i = size;
      while (i > 0 && pos[i - 1] == c - size + i - 1) --i;
      if (i == 0) break;
      ++pos[i - 1];
      for (std::size_t j = i; j < size; ++j) pos[j] = pos[j - 1] + 1;
    }
  }
}

void CombinationSpace::combination_sums(std::span<const double> relations,
                                        std::span<double> out) const {
  if (out.size() != size()) {
    throw std::invalid_argument("combination_sums: output size mismatch");
  }
  for (std::size_t j = 0; j < size(); ++j) {
    double acc = 0.0;
    for (std::size_t k = offsets_[j]; k < offsets_[j + 1]; ++k) acc += relations[indices_[k]];
    out[j] = acc;
  }
}

Rule CombinationSpace::decode(std::size_t j) const {
  Rule rule;
  rule.label = label_;
  for (std::size_t idx : combination(j)) {
    rule.body.push_back(decode_predicate_index(idx, num_events_));
  }
  return rule;
}

std::vector<LabelHead> build_heads(const diff::Tensor& weights, std::size_t max_len,
                                   std::size_t candidate_count, std::size_t num_events) {
  if (weights.rank() != 2) throw std::invalid_argument("build_heads: W must be rank 2");
  const std::size_t d = weights.shape()[0], m = weights.shape()[1];
  const std::size_t c = std::min(candidate_count, d);
  std::vector<LabelHead> heads;
  heads.reserve(m);
  for (std::size_t r = 0; r < m; ++r) {
    LabelHead head;
    head.candidates = select_candidates(weights, r, c);
    head.space = CombinationSpace(head.candidates, max_len, num_events);
    head.logits.assign(head.space.size(), 0.0);
    heads.push_back(std::move(head));
  }
  return heads;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double top = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (double& e : out) {
    e = std::exp(e - top);
    total += e;
  }
  for (double& e : out) e /= total;
  return out;
}

double score_label(std::span<const double> relations, const CombinationSpace& space,
                   std::span<const double> logits, double delta) {
  if (logits.size() != space.size()) {
    throw std::invalid_argument(fmt::format(
        "score_label: {} logits for {} combinations", logits.size(), space.size()));
  }
  std::vector<double> sums(space.size());
  space.combination_sums(relations, sums);
  const auto attention = softmax(logits);
  double raw = 0.0;
  for (std::size_t j = 0; j < sums.size(); ++j) raw += attention[j] * sums[j];
  return std::clamp(raw, delta, 1.0 - delta);
}

diff::Value score_label(diff::Value sums, diff::Value logits, double delta) {
  return diff::clamp(diff::dot(diff::softmax(logits), sums), delta, 1.0 - delta);
}

Rule induce_rule(std::span<const double> logits, const CombinationSpace& space) {
  if (logits.empty() || logits.size() != space.size()) {
    throw std::invalid_argument("induce_rule: logits must be nonempty and match the space");
  }
  const auto best = std::max_element(logits.begin(), logits.end());
  return space.decode(static_cast<std::size_t>(best - logits.begin()));
}

std::vector<RankedRule> rank_rules(std::span<const double> logits,
                                   const CombinationSpace& space, std::size_t k,
                                   bool distinct) {
  if (k == 0) throw std::invalid_argument("rank_rules: k must be >= 1");
  if (logits.size() != space.size()) {
    throw std::invalid_argument("rank_rules: logits do not match the space");
  }
  std::vector<std::size_t> order(logits.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  const auto attention = softmax(logits);
  std::vector<RankedRule> out;
  std::set<std::vector<GroundedPredicate>> seen;
  for (std::size_t j : order) {
    if (out.size() == k) break;
    Rule rule = space.decode(j);
    if (distinct && !seen.insert(canonical_body(rule.body)).second) continue;
    out.push_back({std::move(rule), attention[j], j});
  }
  return out;
}

}  // namespace ntlp
