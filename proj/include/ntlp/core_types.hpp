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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ntlp {

/// Temporal relation between two atomic events. The integer codes are part of
/// the relation-vector layout and of every file format.
enum class PredicateKind : std::uint8_t { Before = 0, During = 1, After = 2 };

inline constexpr std::size_t kNumPredicateKinds = 3;

std::string_view to_string(PredicateKind kind);
std::optional<PredicateKind> parse_predicate_kind(std::string_view name);

/// A predicate applied to an ordered pair of event indices, e.g. before(u, v).
struct GroundedPredicate {
  PredicateKind kind = PredicateKind::Before;
  std::size_t u = 0;
  std::size_t v = 0;

  auto operator<=>(const GroundedPredicate&) const = default;
};

/// e.g. "before(3, 5)".
std::string to_string(const GroundedPredicate& p);

/// after(u,v) -> before(v,u); during(u,v) -> during(min, max); before is kept.
GroundedPredicate canonicalize(GroundedPredicate p);

/// Size of the flattened relation vector: |X| * |X| * 3.
constexpr std::size_t relation_dim(std::size_t num_events) {
  return num_events * num_events * kNumPredicateKinds;
}

/// Flat slot of a predicate in the relation vector, (u * |X| + v) * 3 + kind.
/// Throws std::out_of_range for event indices >= num_events.
std::size_t predicate_index(GroundedPredicate p, std::size_t num_events);

/// Inverse of predicate_index. Throws std::out_of_range past relation_dim.
GroundedPredicate decode_predicate_index(std::size_t index,
                                         std::size_t num_events);

/// A composite-event rule: conjunction of grounded predicates that induces
/// `label`.
struct Rule {
  std::vector<GroundedPredicate> body;
  std::size_t label = 0;

  bool operator==(const Rule&) const = default;
};

/// Sorted, de-duplicated canonical form of a rule body.
std::vector<GroundedPredicate> canonical_body(
    std::span<const GroundedPredicate> body);

/// Rule comparison modes used by the metrics.
enum class RuleEquality { Canonical, Strict };

bool same_body(std::span<const GroundedPredicate> a,
               std::span<const GroundedPredicate> b,
               RuleEquality mode = RuleEquality::Canonical);

/// Throws std::invalid_argument if the body is empty, longer than max_len,
/// references an event >= num_events, or repeats a predicate up to symmetry.
void validate_rule(const Rule& rule, std::size_t num_events,
                   std::size_t max_len);

/// Every canonical grounded predicate over num_events events, in
/// predicate_index order.
std::vector<GroundedPredicate> canonical_predicates(std::size_t num_events);

/// Dense probabilistic atomic-event scores laid out [object][event][time].
class EventStream {
 public:
  EventStream() = default;
  EventStream(std::size_t num_objects, std::size_t num_events,
              std::size_t horizon);
  EventStream(std::size_t num_objects, std::size_t num_events,
              std::size_t horizon, std::vector<double> scores);

  std::size_t num_objects() const { return num_objects_; }
  std::size_t num_events() const { return num_events_; }
  std::size_t horizon() const { return horizon_; }

  double at(std::size_t object, std::size_t event, std::size_t time) const {
    return scores_[offset(object, event) + time];
  }
  void set(std::size_t object, std::size_t event, std::size_t time,
           double score);

  std::span<const double> row(std::size_t object, std::size_t event) const {
    return {scores_.data() + offset(object, event), horizon_};
  }
  std::span<const double> scores() const { return scores_; }

  bool operator==(const EventStream&) const = default;

 private:
  std::size_t offset(std::size_t object, std::size_t event) const {
    return (object * num_events_ + event) * horizon_;
  }

  std::size_t num_objects_ = 0;
  std::size_t num_events_ = 0;
  std::size_t horizon_ = 0;
  std::vector<double> scores_;
};

/// Multi-hot composite-event labels, one bit per rule.
struct LabelVector {
  std::vector<std::uint8_t> bits;

  LabelVector() = default;
  explicit LabelVector(std::size_t num_labels) : bits(num_labels, 0) {}

  std::size_t size() const { return bits.size(); }
  bool test(std::size_t r) const { return bits[r] != 0; }
  void set(std::size_t r, bool on = true) { bits[r] = on ? 1 : 0; }
  std::size_t count() const;

  bool operator==(const LabelVector&) const = default;
};

/// Number of rules of n predicates once symmetric predicates are merged:
/// (floor(P/2) * E^2 + E(E+1)/2)^n. This counts ordered n-tuples, so for
/// n > 1 it over-counts unordered conjunctions.
boost::multiprecision::cpp_int unique_rule_space(std::uint64_t num_events,
                                                 std::uint64_t num_predicates,
                                                 std::uint64_t max_len);

}  // namespace ntlp
