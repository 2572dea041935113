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

#include "ntlp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace ntlp {

namespace {

void check_lists(std::span<const std::vector<Rule>> ranked, std::span<const Rule> truth) {
  if (ranked.size() != truth.size()) {
    throw std::invalid_argument(fmt::format("{} ranked lists for {} true rules", ranked.size(),
                                            truth.size()));
  }
}

}  // namespace

std::optional<std::size_t> rule_rank(std::span<const Rule> ranked, const Rule& truth,
                                     RuleEquality mode) {
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (same_body(ranked[i].body, truth.body, mode)) return i + 1;
  }
  return std::nullopt;
}

double hits_at_k(std::span<const std::vector<Rule>> ranked, std::span<const Rule> truth,
                 std::size_t k, RuleEquality mode) {
  check_lists(ranked, truth);
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < truth.size(); ++r) {
    const auto rank = rule_rank(ranked[r], truth[r], mode);
    if (rank && *rank <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

double mrr(std::span<const std::vector<Rule>> ranked, std::span<const Rule> truth,
           RuleEquality mode) {
  check_lists(ranked, truth);
  if (truth.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t r = 0; r < truth.size(); ++r) {
    if (const auto rank = rule_rank(ranked[r], truth[r], mode)) {
      total += 1.0 / static_cast<double>(*rank);
    }
  }
  return total / static_cast<double>(truth.size());
}

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const std::uint8_t> truth) {
  if (scores.size() != truth.size()) {
    throw std::invalid_argument("average_precision: size mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::size_t positives = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (truth[order[i]] == 0) continue;
    ++positives;
    total += static_cast<double>(positives) / static_cast<double>(i + 1);
  }
  if (positives == 0) return std::nullopt;
  return total / static_cast<double>(positives);
}

ApResult mean_average_precision(std::span<const std::vector<double>> scores,
                                std::span<const LabelVector> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("mean_average_precision: sample counts differ");
  }
  ApResult result;
  if (scores.empty()) return result;
  const std::size_t m = labels.front().size();
  for (std::size_t s = 0; s < scores.size(); ++s) {
    if (scores[s].size() != m || labels[s].size() != m) {
      throw std::invalid_argument(
          fmt::format("mean_average_precision: sample {} has the wrong label count", s));
    }
  }
  std::vector<double> column(scores.size());
  std::vector<std::uint8_t> truth(scores.size());
  double total = 0.0;
  std::size_t evaluated = 0;
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t s = 0; s < scores.size(); ++s) {
      column[s] = scores[s][r];
      truth[s] = labels[s].bits[r];
    }
    if (const auto ap = average_precision(column, truth)) {
      result.per_label.push_back(*ap);
      total += *ap;
      ++evaluated;
    } else {
      result.per_label.push_back(std::numeric_limits<double>::quiet_NaN());
      result.skipped.push_back(r);
    }
  }
  result.mean_ap = evaluated == 0 ? 0.0 : total / static_cast<double>(evaluated);
  return result;
}

EvalReport build_report(std::string method, std::span<const std::vector<Rule>> ranked,
                        std::span<const Rule> truth, const ApResult& ap, RuleEquality mode) {
  check_lists(ranked, truth);
  EvalReport report;
  report.method = std::move(method);
  report.hits_at_1 = hits_at_k(ranked, truth, 1, mode);
  report.hits_at_5 = hits_at_k(ranked, truth, 5, mode);
  report.hits_at_10 = hits_at_k(ranked, truth, 10, mode);
  report.mrr = mrr(ranked, truth, mode);
  report.mean_ap = ap.mean_ap;
  report.evaluated_labels = ap.per_label.size() - ap.skipped.size();
  report.skipped_labels = ap.skipped;
  std::map<std::size_t, std::size_t> hits10;
  for (std::size_t r = 0; r < truth.size(); ++r) {
    const auto rank = rule_rank(ranked[r], truth[r], mode);
    report.ranks.push_back(rank.value_or(0));
    const std::size_t len = canonical_body(truth[r].body).size();
    ++report.per_length[len].labels;
    if (rank && *rank <= 10) ++hits10[len];
  }
  for (auto& [len, stats] : report.per_length) {
    stats.hits_at_10 =
        static_cast<double>(hits10[len]) / static_cast<double>(stats.labels);
  }
  return report;
}

std::string EvalReport::to_text() const {
  std::string out;
  auto line = [&](std::string_view key, const auto& value) {
    out += fmt::format("{}: {}\n", key, value);
  };
  line("method", method);
  line("hits@1", hits_at_1);
  line("hits@5", hits_at_5);
  line("hits@10", hits_at_10);
  line("mAP", mean_ap);
  line("MRR", mrr);
  // All lengths pooled; the variable-length summary.
  line("hits@10_variable", hits_at_10);
  for (const auto& [len, stats] : per_length) {
    line(fmt::format("hits@10_len{}", len), stats.hits_at_10);
    line(fmt::format("labels_len{}", len), stats.labels);
  }
  line("evaluated_labels", evaluated_labels);
  std::string skipped;
  for (std::size_t r : skipped_labels) skipped += fmt::format("{}{}", skipped.empty() ? "" : " ", r);
  line("skipped_labels", skipped.empty() ? std::string("none") : skipped);
  for (std::size_t r = 0; r < ranks.size(); ++r) line(fmt::format("rank_label_{}", r), ranks[r]);
  return out;
}

}  // namespace ntlp
