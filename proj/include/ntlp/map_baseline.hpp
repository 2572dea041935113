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

// Count-based baseline. Relations come from fixed parameters, W is replaced
// by predicate/label co-occurrence frequencies, and rule search reuses the
// attention heads.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ntlp/core_types.hpp"
#include "ntlp/datagen.hpp"
#include "ntlp/diffcore.hpp"
#include "ntlp/model.hpp"
#include "ntlp/structure.hpp"
#include "ntlp/training.hpp"

namespace ntlp {

inline constexpr double kDefaultPresence = 0.5;

/// Indices i with relations[i] >= tau, ascending.
std::vector<std::size_t> binarize_relations(std::span<const double> relations, double tau);

/// Theta [d, R] co-occurrence counts and their per-predicate normalisation.
struct CountTable {
  std::size_t dim = 0;
  std::size_t num_labels = 0;
  std::vector<std::uint64_t> counts;
  std::vector<double> weights;

  std::uint64_t count(std::size_t i, std::size_t r) const { return counts[i * num_labels + r]; }
  double weight(std::size_t i, std::size_t r) const { return weights[i * num_labels + r]; }
  /// Weights as a [d, R] tensor for candidate selection.
  diff::Tensor weight_tensor() const;

  /// Recomputes `weights` from `counts`: each nonzero row divided by its
  /// sum over labels, zero rows left at zero.
  void normalize();

  bool operator==(const CountTable&) const = default;
};

CountTable fit_counts(std::span<const std::vector<std::size_t>> present,
                      std::span<const LabelVector> labels, std::size_t dim,
                      std::size_t num_labels);

/// Relations from `frozen`, thresholded at tau, then counted.
CountTable fit_counts(std::span<const Sample> samples, const ModelParams& frozen, double tau,
                      std::size_t threads = 1);

/// Heads built from the count weights and trained on `relations` with every
/// other parameter frozen.
std::vector<LabelHead> map_induce_rules(const CountTable& table,
                                        std::span<const std::vector<double>> relations,
                                        std::span<const LabelVector> labels,
                                        std::size_t max_len, std::size_t candidate_count,
                                        std::size_t num_events, const TrainConfig& cfg);

/// The `count` most frequent training labels (lower index on ties).
LabelVector map_predict_labels(std::span<const LabelVector> train_labels, std::size_t count);

/// Mean active labels rounded to the nearest integer, at least 1.
std::size_t typical_active_labels(std::span<const LabelVector> labels);

}  // namespace ntlp
