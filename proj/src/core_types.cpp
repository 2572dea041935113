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

#include "ntlp/core_types.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace ntlp {

std::string_view to_string(PredicateKind kind) {
  switch (kind) {
    case PredicateKind::Before:
      return "before";
    case PredicateKind::During:
      return "during";
    case PredicateKind::After:
      return "after";
  }
  return "?";
}

std::optional<PredicateKind> parse_predicate_kind(std::string_view name) {
  if (name == "before") return PredicateKind::Before;
  if (name == "during") return PredicateKind::During;
  if (name == "after") return PredicateKind::After;
  return std::nullopt;
}

std::string to_string(const GroundedPredicate& p) {
  return fmt::format("{}({}, {})", to_string(p.kind), p.u, p.v);
}

GroundedPredicate canonicalize(GroundedPredicate p) {
  switch (p.kind) {
    case PredicateKind::After:
      return {PredicateKind::Before, p.v, p.u};
    case PredicateKind::During:
      return {PredicateKind::During, std::min(p.u, p.v), std::max(p.u, p.v)};
    case PredicateKind::Before:
      break;
  }
  return p;
}

std::size_t predicate_index(GroundedPredicate p, std::size_t num_events) {
  if (p.u >= num_events || p.v >= num_events) {
    throw std::out_of_range(fmt::format(
        "predicate_index: events ({}, {}) out of range for {} events", p.u,
        p.v, num_events));
  }
  return (p.u * num_events + p.v) * kNumPredicateKinds +
         static_cast<std::size_t>(p.kind);
}

GroundedPredicate decode_predicate_index(std::size_t index,
                                         std::size_t num_events) {
  if (index >= relation_dim(num_events)) {
    throw std::out_of_range(fmt::format(
        "decode_predicate_index: {} out of range for {} events", index,
        num_events));
  }
  const std::size_t pair = index / kNumPredicateKinds;
  return {static_cast<PredicateKind>(index % kNumPredicateKinds),
          pair / num_events, pair % num_events};
}

std::vector<GroundedPredicate> canonical_body(
    std::span<const GroundedPredicate> body) {
  std::vector<GroundedPredicate> out;
  out.reserve(body.size());
  for (const auto& p : body) out.push_back(canonicalize(p));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool same_body(std::span<const GroundedPredicate> a,
               std::span<const GroundedPredicate> b, RuleEquality mode) {
  if (mode == RuleEquality::Canonical) {
    return canonical_body(a) == canonical_body(b);
  }
  std::vector<GroundedPredicate> sa(a.begin(), a.end());
  std::vector<GroundedPredicate> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

void validate_rule(const Rule& rule, std::size_t num_events,
                   std::size_t max_len) {
  if (rule.body.empty() || rule.body.size() > max_len) {
    throw std::invalid_argument(
        fmt::format("rule {}: body length {} outside [1, {}]", rule.label,
                    rule.body.size(), max_len));
  }
  for (const auto& p : rule.body) {
    if (p.u >= num_events || p.v >= num_events) {
      throw std::invalid_argument(fmt::format(
          "rule {}: event index out of range for {} events", rule.label,
          num_events));
    }
  }
  if (canonical_body(rule.body).size() != rule.body.size()) {
    throw std::invalid_argument(
        fmt::format("rule {}: duplicate predicate in body", rule.label));
  }
}

std::vector<GroundedPredicate> canonical_predicates(std::size_t num_events) {
  std::vector<GroundedPredicate> out;
  for (std::size_t idx = 0; idx < relation_dim(num_events); ++idx) {
    const auto p = decode_predicate_index(idx, num_events);
    if (canonicalize(p) == p) out.push_back(p);
  }
  return out;
}

EventStream::EventStream(std::size_t num_objects, std::size_t num_events,
                         std::size_t horizon)
    : EventStream(num_objects, num_events, horizon,
                  std::vector<double>(num_objects * num_events * horizon,
                                      0.0)) {}

EventStream::EventStream(std::size_t num_objects, std::size_t num_events,
                         std::size_t horizon, std::vector<double> scores)
    : num_objects_(num_objects),
      num_events_(num_events),
      horizon_(horizon),
      scores_(std::move(scores)) {
  if (num_objects == 0 || num_events == 0 || horizon == 0) {
    throw std::invalid_argument("EventStream: dimensions must be positive");
  }
  if (scores_.size() != num_objects * num_events * horizon) {
    throw std::invalid_argument(fmt::format(
        "EventStream: expected {} scores, got {}",
        num_objects * num_events * horizon, scores_.size()));
  }
  for (double s : scores_) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw std::invalid_argument("EventStream: score outside [0, 1]");
    }
  }
}

void EventStream::set(std::size_t object, std::size_t event, std::size_t time,
                      double score) {
  if (!(score >= 0.0 && score <= 1.0)) {
    throw std::invalid_argument("EventStream: score outside [0, 1]");
  }
  scores_.at(offset(object, event) + time) = score;
}

std::size_t LabelVector::count() const {
  return static_cast<std::size_t>(
      std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

boost::multiprecision::cpp_int unique_rule_space(std::uint64_t num_events,
                                                 std::uint64_t num_predicates,
                                                 std::uint64_t max_len) {
  if (num_events < 1 || num_predicates < 2 || max_len < 1) {
    throw std::invalid_argument(
        "unique_rule_space: need E >= 1, P >= 2, n >= 1");
  }
  using boost::multiprecision::cpp_int;
  const cpp_int e = num_events;
  const cpp_int base = cpp_int(num_predicates / 2) * e * e + e * (e + 1) / 2;
  return boost::multiprecision::pow(base, static_cast<unsigned>(max_len));
}

}  // namespace ntlp
