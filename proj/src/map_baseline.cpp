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

#include "ntlp/map_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "ntlp/parallel.hpp"

namespace ntlp {

std::vector<std::size_t> binarize_relations(std::span<const double> relations, double tau) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < relations.size(); ++i) {
    if (relations[i] >= tau) out.push_back(i);
  }
  return out;
}

diff::Tensor CountTable::weight_tensor() const {
  return diff::Tensor({dim, num_labels}, weights);
}

void CountTable::normalize() {
  weights.assign(counts.size(), 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    std::uint64_t total = 0;
    for (std::size_t r = 0; r < num_labels; ++r) total += count(i, r);
    if (total == 0) continue;
    for (std::size_t r = 0; r < num_labels; ++r) {
      weights[i * num_labels + r] =
          static_cast<double>(count(i, r)) / static_cast<double>(total);
    }
  }
}

CountTable fit_counts(std::span<const std::vector<std::size_t>> present,
                      std::span<const LabelVector> labels, std::size_t dim,
                      std::size_t num_labels) {
  if (present.size() != labels.size()) {
    throw std::invalid_argument("fit_counts: predicate and label lists differ in length");
  }
  CountTable table;
  table.dim = dim;
  table.num_labels = num_labels;
  table.counts.assign(dim * num_labels, 0);
  std::vector<std::size_t> active;
  for (std::size_t s = 0; s < present.size(); ++s) {
    if (labels[s].size() != num_labels) {
      throw std::invalid_argument(fmt::format("fit_counts: sample {} has {} labels, expected {}",
                                              s, labels[s].size(), num_labels));
    }
    active.clear();
    for (std::size_t r = 0; r < num_labels; ++r) {
      if (labels[s].test(r)) active.push_back(r);
    }
    for (std::size_t i : present[s]) {
      if (i >= dim) throw std::out_of_range("fit_counts: predicate index out of range");
      for (std::size_t r : active) ++table.counts[i * num_labels + r];
    }
  }
  table.normalize();
  return table;
}

CountTable fit_counts(std::span<const Sample> samples, const ModelParams& frozen, double tau,
                      std::size_t threads) {
  std::vector<std::vector<std::size_t>> present(samples.size());
  std::vector<LabelVector> labels;
  labels.reserve(samples.size());
  for (const auto& s : samples) labels.push_back(s.labels);
  parallel_chunks(samples.size(), threads == 0 ? default_threads() : threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      present[i] =
                          binarize_relations(relation_vector(frozen, samples[i].stream), tau);
                    }
                  });
  return fit_counts(present, labels, frozen.config.relation_dim(), frozen.config.num_labels);
}

std::vector<LabelHead> map_induce_rules(const CountTable& table,
                                        std::span<const std::vector<double>> relations,
                                        std::span<const LabelVector> labels,
                                        std::size_t max_len, std::size_t candidate_count,
                                        std::size_t num_events, const TrainConfig& cfg) {
  auto heads = build_heads(table.weight_tensor(), max_len, candidate_count, num_events);
  train_structure_stage(relations, labels, heads, cfg);
  return heads;
}

LabelVector map_predict_labels(std::span<const LabelVector> train_labels, std::size_t count) {
  if (train_labels.empty()) throw std::invalid_argument("map_predict_labels: no training labels");
  const std::size_t m = train_labels.front().size();
  std::vector<std::size_t> freq(m, 0);
  for (const auto& y : train_labels) {
    for (std::size_t r = 0; r < m; ++r) freq[r] += y.test(r) ? 1 : 0;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return freq[a] > freq[b]; });
  LabelVector out(m);
  for (std::size_t i = 0; i < std::min(count, m); ++i) out.set(order[i]);
  return out;
}

std::size_t typical_active_labels(std::span<const LabelVector> labels) {
  if (labels.empty()) return 1;
  double total = 0.0;
  for (const auto& y : labels) total += static_cast<double>(y.count());
  const auto rounded = std::llround(total / static_cast<double>(labels.size()));
  return static_cast<std::size_t>(std::max<long long>(1, rounded));
}

}  // namespace ntlp
