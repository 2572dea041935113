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

// Exact interval semantics for temporal predicates and rules.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ntlp/core_types.hpp"

namespace ntlp {

/// Closed time interval; start == end is an instantaneous event.
struct Interval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool operator==(const Interval&) const = default;
};

/// One located occurrence of an event.
struct Occurrence {
  std::size_t object = 0;
  Interval interval;
};

/// Ground-truth occurrences per (object, event) on the timeline [1, T].
class IntervalTimeline {
 public:
  IntervalTimeline() = default;
  IntervalTimeline(std::size_t num_objects, std::size_t num_events,
                   std::size_t horizon);

  std::size_t num_objects() const { return num_objects_; }
  std::size_t num_events() const { return num_events_; }
  std::size_t horizon() const { return horizon_; }

  /// Returns false (and leaves the timeline unchanged) if the interval lies
  /// outside [1, T] or overlaps an existing occurrence of the same
  /// (object, event).
  bool try_add(std::size_t object, std::size_t event, Interval interval);
  /// As try_add but throws std::invalid_argument on failure.
  void add(std::size_t object, std::size_t event, Interval interval);

  std::span<const Interval> intervals(std::size_t object,
                                      std::size_t event) const {
    return slots_[object * num_events_ + event];
  }
  /// All occurrences of an event across objects, object-major.
  std::vector<Occurrence> occurrences(std::size_t event) const;
  bool occurs(std::size_t event) const;

  bool operator==(const IntervalTimeline&) const = default;

 private:
  std::size_t num_objects_ = 0;
  std::size_t num_events_ = 0;
  std::size_t horizon_ = 0;
  std::vector<std::vector<Interval>> slots_;
};

/// before: u.end <= v.start; after: v.end <= u.start;
/// during: min(v.end - u.start, u.end - v.start) > 0.
bool eval_predicate(PredicateKind kind, const Interval& u, const Interval& v);

/// The single kind holding for a pair of positive-length intervals,
/// checked in the order before, after, during.
PredicateKind oracle_predicate(const Interval& u, const Interval& v);

/// True iff one occurrence per distinct body event (any object) can be chosen
/// so that every predicate holds.
bool eval_rule(const Rule& rule, const IntervalTimeline& timeline);

/// Bit r set iff eval_rule(candidates[r], timeline).
LabelVector consistent_rules(const IntervalTimeline& timeline,
                             std::span<const Rule> candidates);

}  // namespace ntlp
