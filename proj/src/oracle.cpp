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

#include "ntlp/oracle.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace ntlp {

IntervalTimeline::IntervalTimeline(std::size_t num_objects,
                                   std::size_t num_events, std::size_t horizon)
    : num_objects_(num_objects),
      num_events_(num_events),
      horizon_(horizon),
      slots_(num_objects * num_events) {}

bool IntervalTimeline::try_add(std::size_t object, std::size_t event,
                               Interval interval) {
  if (object >= num_objects_ || event >= num_events_) return false;
  if (!(interval.start <= interval.end) || interval.start < 1.0 ||
      interval.end > static_cast<double>(horizon_)) {
    return false;
  }
  auto& slot = slots_[object * num_events_ + event];
  for (const Interval& other : slot) {
    if (interval.start <= other.end && other.start <= interval.end) {
      return false;
    }
  }
  const auto pos = std::lower_bound(
      slot.begin(), slot.end(), interval,
      [](const Interval& a, const Interval& b) { return a.start < b.start; });
  slot.insert(pos, interval);
  return true;
}

void IntervalTimeline::add(std::size_t object, std::size_t event,
                           Interval interval) {
  if (!try_add(object, event, interval)) {
    throw std::invalid_argument(fmt::format(
        "IntervalTimeline: cannot place [{}, {}] for object {} event {}",
        interval.start, interval.end, object, event));
  }
}

std::vector<Occurrence> IntervalTimeline::occurrences(std::size_t event) const {
  std::vector<Occurrence> out;
  if (event >= num_events_) return out;
  for (std::size_t o = 0; o < num_objects_; ++o) {
    for (const Interval& iv : intervals(o, event)) out.push_back({o, iv});
  }
  return out;
}

bool IntervalTimeline::occurs(std::size_t event) const {
  if (event >= num_events_) return false;
  for (std::size_t o = 0; o < num_objects_; ++o) {
    if (!intervals(o, event).empty()) return true;
  }
  return false;
}

bool eval_predicate(PredicateKind kind, const Interval& u, const Interval& v) {
  switch (kind) {
    case PredicateKind::Before:
      return u.end <= v.start;
    case PredicateKind::After:
      return v.end <= u.start;
    case PredicateKind::During:
      return std::min(v.end - u.start, u.end - v.start) > 0.0;
  }
  return false;
}

PredicateKind oracle_predicate(const Interval& u, const Interval& v) {
  if (eval_predicate(PredicateKind::Before, u, v)) return PredicateKind::Before;
  if (eval_predicate(PredicateKind::After, u, v)) return PredicateKind::After;
  return PredicateKind::During;
}

namespace {

// Backtracking over one occurrence per distinct event, checking each
// predicate as soon as both of its events are bound.
class RuleSearch {
 public:
  RuleSearch(const Rule& rule, const IntervalTimeline& timeline)
      : rule_(rule) {
    for (const auto& p : rule.body) {
      add_event(p.u);
      add_event(p.v);
    }
    candidates_.reserve(events_.size());
    for (std::size_t e : events_) candidates_.push_back(timeline.occurrences(e));
    chosen_.assign(events_.size(), nullptr);
  }

  bool run() {
    for (const auto& c : candidates_) {
      if (c.empty()) return false;
    }
    return assign(0);
  }

 private:
  void add_event(std::size_t e) {
    if (std::find(events_.begin(), events_.end(), e) == events_.end()) {
      events_.push_back(e);
    }
  }

  std::size_t slot(std::size_t event) const {
    return static_cast<std::size_t>(
        std::find(events_.begin(), events_.end(), event) - events_.begin());
  }

  bool consistent(std::size_t bound) const {
    for (const auto& p : rule_.body) {
      const std::size_t su = slot(p.u), sv = slot(p.v);
      if (su > bound || sv > bound) continue;
      if (su != bound && sv != bound) continue;
      if (!eval_predicate(p.kind, chosen_[su]->interval, chosen_[sv]->interval)) {
        return false;
      }
    }
    return true;
  }

  bool assign(std::size_t depth) {
    if (depth == events_.size()) return true;
    for (const Occurrence& occ : candidates_[depth]) {
      chosen_[depth] = &occ;
      if (consistent(depth) && assign(depth + 1)) return true;
    }
    chosen_[depth] = nullptr;
    return false;
  }

  const Rule& rule_;
  std::vector<std::size_t> events_;
  std::vector<std::vector<Occurrence>> candidates_;
  std::vector<const Occurrence*> chosen_;
};

}  // namespace

bool eval_rule(const Rule& rule, const IntervalTimeline& timeline) {
  if (rule.body.empty()) return false;
  for (const auto& p : rule.body) {
    if (p.u >= timeline.num_events() || p.v >= timeline.num_events()) {
      return false;
    }
  }
  return RuleSearch(rule, timeline).run();
}

LabelVector consistent_rules(const IntervalTimeline& timeline,
                             std::span<const Rule> candidates) {
  LabelVector labels(candidates.size());
  for (std::size_t r = 0; r < candidates.size(); ++r) {
    labels.set(r, eval_rule(candidates[r], timeline));
  }
  return labels;
}

}  // namespace ntlp
