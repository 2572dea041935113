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


#include <set>

#include <gtest/gtest.h>

#include "ntlp/core_types.hpp"

namespace ntlp {
namespace {

using K = PredicateKind;

std::vector<GroundedPredicate> all_predicates(std::size_t x) {
  std::vector<GroundedPredicate> out;
  for (std::size_t k = 0; k < kNumPredicateKinds; ++k) {
    for (std::size_t u = 0; u < x; ++u) {
      for (std::size_t v = 0; v < x; ++v) out.push_back({static_cast<K>(k), u, v});
    }
  }
  return out;
}

TEST(Canonicalize, MapsAfterToBeforeAndOrdersDuring) {
  EXPECT_EQ(canonicalize({K::After, 3, 1}), (GroundedPredicate{K::Before, 1, 3}));
  EXPECT_EQ(canonicalize({K::During, 5, 2}), (GroundedPredicate{K::During, 2, 5}));
  EXPECT_EQ(canonicalize({K::Before, 1, 3}), (GroundedPredicate{K::Before, 1, 3}));
}

TEST(Canonicalize, Idempotent) {
  for (const auto& p : all_predicates(6)) {
    EXPECT_EQ(canonicalize(canonicalize(p)), canonicalize(p));
  }
}

TEST(PredicateIndex, HandEncodedValues) {
  EXPECT_EQ(predicate_index({K::Before, 0, 1}, 14), 3u);
  EXPECT_EQ(predicate_index({K::During, 0, 0}, 14), 1u);
  // (u * X + v) * 3 + kind
  EXPECT_EQ(predicate_index({K::After, 13, 13}, 14), (13u * 14 + 13) * 3 + 2);
}

TEST(PredicateIndex, BijectiveOnAllPredicates) {
  std::set<std::size_t> seen;
  for (const auto& p : all_predicates(5)) {
    const auto i = predicate_index(p, 5);
    EXPECT_LT(i, relation_dim(5));
    EXPECT_TRUE(seen.insert(i).second);
    EXPECT_EQ(decode_predicate_index(i, 5), p);
  }
  EXPECT_EQ(seen.size(), relation_dim(5));
}

TEST(UniqueRuleSpace, KnownValues) {
  EXPECT_EQ(unique_rule_space(14, 3, 1), 301);
  EXPECT_EQ(unique_rule_space(2, 3, 1), 7);
  EXPECT_EQ(unique_rule_space(14, 3, 2), 90601);
}

TEST(UniqueRuleSpace, MatchesBruteForceCount) {
  for (std::size_t x = 1; x <= 5; ++x) {
    std::set<GroundedPredicate> canon;
    for (const auto& p : all_predicates(x)) canon.insert(canonicalize(p));
    EXPECT_EQ(unique_rule_space(x, 3, 1), canon.size()) << "X=" << x;
    EXPECT_EQ(canonical_predicates(x).size(), canon.size());
    // Ordered tuples of length 2.
    EXPECT_EQ(unique_rule_space(x, 3, 2), canon.size() * canon.size());
  }
}

TEST(UniqueRuleSpace, LargeValuesDoNotOverflow) {
  const auto v = unique_rule_space(100, 3, 8);
  boost::multiprecision::cpp_int expected = 1;
  for (int i = 0; i < 8; ++i) expected *= 100 * 100 + 100 * 101 / 2;
  EXPECT_EQ(v, expected);
  EXPECT_THROW(unique_rule_space(0, 3, 1), std::invalid_argument);
}

TEST(SameBody, CanonicalEqualityIgnoresOrderAndSymmetry) {
  const std::vector<GroundedPredicate> a = {{K::Before, 0, 1}, {K::During, 2, 3}};
  const std::vector<GroundedPredicate> b = {{K::During, 3, 2}, {K::After, 1, 0}};
  EXPECT_TRUE(same_body(a, b));
  EXPECT_FALSE(same_body(a, b, RuleEquality::Strict));
  EXPECT_TRUE(same_body(a, std::vector<GroundedPredicate>{a[1], a[0]}, RuleEquality::Strict));
  EXPECT_FALSE(same_body(a, std::vector<GroundedPredicate>{a[0]}));
}

TEST(ValidateRule, RejectsBadRules) {
  EXPECT_NO_THROW(validate_rule({{{K::Before, 0, 1}}, 0}, 3, 1));
  EXPECT_THROW(validate_rule({{}, 0}, 3, 1), std::invalid_argument);
  EXPECT_THROW(validate_rule({{{K::Before, 0, 3}}, 0}, 3, 1), std::invalid_argument);
  EXPECT_THROW(validate_rule({{{K::Before, 0, 1}, {K::During, 1, 2}}, 0}, 3, 1),
               std::invalid_argument);
  // after(1, 0) repeats before(0, 1) once canonicalised.
  EXPECT_THROW(validate_rule({{{K::Before, 0, 1}, {K::After, 1, 0}}, 0}, 3, 2),
               std::invalid_argument);
}

TEST(EventStream, RowsAreTimeMinor) {
  EventStream s(2, 3, 4);
  s.set(1, 2, 3, 0.5);
  EXPECT_EQ(s.at(1, 2, 3), 0.5);
  EXPECT_EQ(s.scores()[(1 * 3 + 2) * 4 + 3], 0.5);
  EXPECT_EQ(s.row(1, 2)[3], 0.5);
}

TEST(EventStream, RejectsOutOfRangeScores) {
  EventStream s(1, 1, 2);
  EXPECT_THROW(s.set(0, 0, 0, 1.5), std::invalid_argument);
  EXPECT_THROW(s.set(0, 0, 0, -0.1), std::invalid_argument);
  EXPECT_THROW(EventStream(1, 1, 2, {0.1}), std::invalid_argument);
  EXPECT_THROW(EventStream(0, 1, 2), std::invalid_argument);
}

TEST(PredicateKind, TextRoundTrip) {
  for (auto k : {K::Before, K::During, K::After}) {
    EXPECT_EQ(parse_predicate_kind(to_string(k)), k);
  }
  EXPECT_FALSE(parse_predicate_kind("overlaps"));
  EXPECT_EQ(to_string(GroundedPredicate{K::Before, 3, 5}), "before(3, 5)");
}

}  // namespace
}  // namespace ntlp
