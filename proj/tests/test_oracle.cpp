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


#include <random>

#include <gtest/gtest.h>

#include "ntlp/oracle.hpp"

namespace ntlp {
namespace {

using K = PredicateKind;

Interval random_interval(std::mt19937_64& rng) {
  // Integer endpoints make boundary ties common.
  std::uniform_int_distribution<int> start(1, 20), len(0, 6);
  const double s = start(rng);
  return {s, s + len(rng)};
}

TEST(EvalPredicate, BoundaryCases) {
  EXPECT_TRUE(eval_predicate(K::Before, {1, 2}, {3, 4}));
  EXPECT_TRUE(eval_predicate(K::During, {1, 5}, {3, 4}));
  EXPECT_FALSE(eval_predicate(K::During, {1, 2}, {2, 3}));
  EXPECT_TRUE(eval_predicate(K::Before, {1, 2}, {2, 3}));
  EXPECT_TRUE(eval_predicate(K::After, {3, 4}, {1, 2}));
  EXPECT_FALSE(eval_predicate(K::Before, {1, 3}, {2, 4}));
}

TEST(EvalPredicate, SymmetryAndExclusion) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5000; ++i) {
    const Interval u = random_interval(rng), v = random_interval(rng);
    const bool before = eval_predicate(K::Before, u, v);
    const bool after = eval_predicate(K::After, u, v);
    const bool during = eval_predicate(K::During, u, v);
    EXPECT_EQ(before, eval_predicate(K::After, v, u));
    EXPECT_EQ(during, eval_predicate(K::During, v, u));
    if (u.length() > 0 || v.length() > 0) {
      EXPECT_FALSE(before && after);
    }
    if (during) {
      EXPECT_FALSE(before || after);
    }
    // Every pair gets exactly one label from the oracle.
    const K label = oracle_predicate(u, v);
    EXPECT_TRUE(eval_predicate(label, u, v) || (label == K::During && !before && !after));
  }
}

TEST(EvalPredicate, KindsPartitionPositiveLengthPairs) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5000; ++i) {
    Interval u = random_interval(rng), v = random_interval(rng);
    u.end += 1;
    v.end += 1;
    const int holding = eval_predicate(K::Before, u, v) + eval_predicate(K::During, u, v) +
                        eval_predicate(K::After, u, v);
    EXPECT_EQ(holding, 1) << u.start << " " << u.end << " " << v.start << " " << v.end;
  }
}

TEST(Timeline, RejectsOverlapAndOutOfRange) {
  IntervalTimeline tl(2, 3, 10);
  EXPECT_TRUE(tl.try_add(0, 1, {2, 4}));
  EXPECT_FALSE(tl.try_add(0, 1, {4, 6}));
  EXPECT_TRUE(tl.try_add(1, 1, {4, 6}));
  EXPECT_FALSE(tl.try_add(0, 0, {0, 2}));
  EXPECT_FALSE(tl.try_add(0, 0, {8, 11}));
  EXPECT_FALSE(tl.try_add(0, 0, {5, 4}));
  EXPECT_FALSE(tl.try_add(2, 0, {1, 2}));
  EXPECT_THROW(tl.add(0, 1, {3, 5}), std::invalid_argument);
  EXPECT_TRUE(tl.occurs(1));
  EXPECT_FALSE(tl.occurs(2));
  ASSERT_EQ(tl.occurrences(1).size(), 2u);
  EXPECT_EQ(tl.occurrences(1)[1].object, 1u);
}

TEST(EvalRule, SingleAndConjunction) {
  IntervalTimeline tl(1, 3, 20);
  tl.add(0, 0, {1, 2});
  tl.add(0, 1, {5, 6});
  EXPECT_TRUE(eval_rule({{{K::Before, 0, 1}}, 0}, tl));
  EXPECT_FALSE(eval_rule({{{K::Before, 0, 2}}, 0}, tl));

  IntervalTimeline tl2(1, 3, 20);
  tl2.add(0, 0, {1, 2});
  tl2.add(0, 1, {4, 8});
  tl2.add(0, 2, {6, 7});
  EXPECT_TRUE(eval_rule({{{K::Before, 0, 1}, {K::During, 1, 2}}, 0}, tl2));
  EXPECT_FALSE(eval_rule({{{K::Before, 0, 1}, {K::After, 1, 2}}, 0}, tl2));
}

TEST(EvalRule, QuantifiesOverOccurrencesAndObjects) {
  IntervalTimeline tl(2, 2, 30);
  tl.add(0, 0, {10, 12});
  tl.add(1, 1, {1, 3});
  // Only a cross-object pairing satisfies after(0, 1).
  EXPECT_TRUE(eval_rule({{{K::After, 0, 1}}, 0}, tl));
  EXPECT_FALSE(eval_rule({{{K::Before, 0, 1}}, 0}, tl));
  tl.add(0, 1, {20, 22});
  EXPECT_TRUE(eval_rule({{{K::Before, 0, 1}}, 0}, tl));
  // One binding must satisfy every predicate: event 1 cannot be both
  // before and after event 0 at once, even with two occurrences.
  EXPECT_FALSE(eval_rule({{{K::After, 0, 1}, {K::Before, 0, 1}}, 0}, tl));
  // Distinct events may bind to different objects' occurrences.
  tl.add(1, 0, {25, 27});
  EXPECT_TRUE(eval_rule({{{K::During, 0, 0}}, 0}, tl));
}

TEST(ConsistentRules, EmptyAndCoincidentLabels) {
  const std::vector<Rule> pool = {{{{K::Before, 0, 1}}, 0},
                                  {{{K::Before, 0, 2}}, 1},
                                  {{{K::During, 1, 2}}, 2}};
  IntervalTimeline empty(1, 3, 20);
  EXPECT_EQ(consistent_rules(empty, pool).count(), 0u);

  IntervalTimeline tl(1, 3, 20);
  tl.add(0, 0, {1, 3});
  tl.add(0, 1, {5, 7});
  tl.add(0, 2, {12, 14});  // happens to follow event 0 as well
  const LabelVector y = consistent_rules(tl, pool);
  EXPECT_TRUE(y.test(0));
  EXPECT_TRUE(y.test(1));
  EXPECT_FALSE(y.test(2));
}

TEST(ConsistentRules, MonotoneUnderAddedOccurrences) {
  std::mt19937_64 rng(3);
  std::vector<Rule> pool;
  for (std::size_t u = 0; u < 3; ++u) {
    for (std::size_t v = 0; v < 3; ++v) {
      for (K k : {K::Before, K::During, K::After}) pool.push_back({{{k, u, v}}, pool.size()});
    }
  }
  for (int trial = 0; trial < 200; ++trial) {
    IntervalTimeline tl(2, 3, 30);
    LabelVector prev = consistent_rules(tl, pool);
    std::uniform_int_distribution<std::size_t> obj(0, 1), ev(0, 2);
    for (int step = 0; step < 6; ++step) {
      if (!tl.try_add(obj(rng), ev(rng), random_interval(rng))) continue;
      const LabelVector next = consistent_rules(tl, pool);
      for (std::size_t r = 0; r < pool.size(); ++r) {
        if (prev.test(r)) {
          EXPECT_TRUE(next.test(r));
        }
      }
      prev = next;
    }
  }
}

}  // namespace
}  // namespace ntlp
