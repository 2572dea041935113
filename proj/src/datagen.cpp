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

#include "ntlp/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include <fmt/format.h>

#include "ntlp/parallel.hpp"

namespace ntlp {

void GenConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw std::invalid_argument("GenConfig: " + msg);
  };
  if (num_events < 1) fail("num_events must be >= 1");
  if (num_objects < 1) fail("num_objects must be >= 1");
  if (max_rule_len < 1) fail("max_rule_len must be >= 1");
  if (rules_per_sample < 1) fail("rules_per_sample must be >= 1");
  if (num_rules < 1) fail("num_rules must be >= 1");
  if (train_count < 1 || val_count < 1 || test_count < 1) {
    fail("split counts must be >= 1");
  }
  if (detection_means.empty()) fail("detection_means must not be empty");
  for (double m : detection_means) {
    if (!(m > 0.0 && m <= 1.0)) fail(fmt::format("detection mean {} outside (0, 1]", m));
  }
  if (!(detection_std >= 0.0) || !(noise_std >= 0.0)) {
    fail("standard deviations must be >= 0");
  }
  if (interval_len_min > interval_len_max) fail("interval_len_min > interval_len_max");
  if (horizon <= interval_len_max) fail("horizon must exceed interval_len_max");
  const auto bound = unique_rule_space(num_events, kNumPredicateKinds, max_rule_len);
  if (boost::multiprecision::cpp_int(num_rules) > bound) {
    fail(fmt::format("num_rules {} exceeds the unique rule space {} for {} events "
                     "and max length {}",
                     num_rules, bound.str(), num_events, max_rule_len));
  }
}

Placement Placement::from(const GenConfig& cfg) {
  Placement p;
  p.num_objects = cfg.num_objects;
  p.horizon = cfg.horizon;
  p.len_min = cfg.interval_len_min;
  p.len_max = cfg.interval_len_max;
  return p;
}

const std::vector<Sample>& GeneratedDataset::split(Split s) const {
  switch (s) {
    case Split::Train:
      return train;
    case Split::Val:
      return val;
    case Split::Test:
      break;
  }
  return test;
}

std::vector<Sample>& GeneratedDataset::split(Split s) {
  return const_cast<std::vector<Sample>&>(std::as_const(*this).split(s));
}

std::vector<std::string> default_event_names(const GenConfig& cfg) {
  static constexpr std::array<const char*, 4> kClasses = {"rotate", "slide",
                                                          "pick_place", "contain"};
  static constexpr std::array<const char*, 6> kObjects = {
      "cone", "cube", "sphere", "snitch", "cylinder", "torus"};
  const std::size_t classes = cfg.detection_means.size();
  std::vector<std::string> names;
  names.reserve(cfg.num_events);
  for (std::size_t x = 0; x < cfg.num_events; ++x) {
    const std::size_t c = x % classes, o = x / classes;
    const std::string cls = c < kClasses.size() ? kClasses[c] : fmt::format("move{}", c);
    const std::string obj = o < kObjects.size() ? kObjects[o] : fmt::format("obj{}", o);
    names.push_back(cls + "_" + obj);
  }
  return names;
}

namespace {

std::vector<std::size_t> body_events(const Rule& rule) {
  std::vector<std::size_t> events;
  for (const auto& p : rule.body) {
    for (std::size_t e : {p.u, p.v}) {
      if (std::find(events.begin(), events.end(), e) == events.end()) {
        events.push_back(e);
      }
    }
  }
  return events;
}

// An event ordered against itself can only hold as a single time point.
bool is_instantaneous(const Rule& rule, std::size_t event) {
  return std::any_of(rule.body.begin(), rule.body.end(), [&](const auto& p) {
    return p.u == event && p.v == event && p.kind != PredicateKind::During;
  });
}

std::string describe(const Rule& rule) {
  std::string out;
  for (const auto& p : rule.body) {
    if (!out.empty()) out += " AND ";
    out += to_string(p);
  }
  return out;
}

double draw(std::mt19937_64& rng, double mean, double sd) {
  if (sd == 0.0) return mean;
  return std::normal_distribution<double>(mean, sd)(rng);
}

}  // namespace

bool place_rule(std::mt19937_64& rng, const Rule& rule,
                const Placement& placement, IntervalTimeline& timeline) {
  const auto events = body_events(rule);
  std::vector<bool> instant(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    instant[i] = is_instantaneous(rule, events[i]);
  }
  std::uniform_int_distribution<std::size_t> pick_object(0, placement.num_objects - 1);
  std::uniform_int_distribution<std::size_t> pick_len(placement.len_min, placement.len_max);
  for (std::size_t attempt = 0; attempt < placement.max_attempts; ++attempt) {
    IntervalTimeline local(timeline.num_objects(), timeline.num_events(),
                           timeline.horizon());
    IntervalTimeline merged = timeline;
    bool ok = true;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const std::size_t object = pick_object(rng);
      const std::size_t len = instant[i] ? 0 : pick_len(rng);
      if (len + 1 > placement.horizon) return false;
      std::uniform_int_distribution<std::size_t> pick_start(1, placement.horizon - len);
      const double start = static_cast<double>(pick_start(rng));
      const Interval iv{start, start + static_cast<double>(len)};
      local.add(object, events[i], iv);
      ok = ok && merged.try_add(object, events[i], iv);
    }
    if (ok && eval_rule(rule, local)) {
      timeline = std::move(merged);
      return true;
    }
  }
  return false;
}

std::vector<Rule> sample_rules(std::mt19937_64& rng, std::size_t count,
                               std::size_t max_len, std::size_t num_events,
                               const Placement& placement) {
  if (max_len < 1) throw std::invalid_argument("sample_rules: max_len must be >= 1");
  const auto space = unique_rule_space(num_events, kNumPredicateKinds, max_len);
  if (boost::multiprecision::cpp_int(count) > space) {
    throw std::invalid_argument(fmt::format(
        "sample_rules: {} rules requested but the unique rule space is {}", count,
        space.str()));
  }
  const auto predicates = canonical_predicates(num_events);
  const std::size_t longest = std::min(max_len, predicates.size());
  std::uniform_int_distribution<std::size_t> pick_len(1, longest);
  std::uniform_int_distribution<std::size_t> pick_pred(0, predicates.size() - 1);

  std::set<std::vector<GroundedPredicate>> seen;
  std::vector<Rule> rules;
  rules.reserve(count);
  const std::size_t max_draws = 1000 * count + 10000;
  for (std::size_t draws = 0; rules.size() < count; ++draws) {
    if (draws == max_draws) {
      throw std::runtime_error(fmt::format(
          "sample_rules: only {} of {} distinct satisfiable rules after {} draws",
          rules.size(), count, max_draws));
    }
    const std::size_t len = pick_len(rng);
    std::vector<GroundedPredicate> body;
    while (body.size() < len) {
      const auto p = predicates[pick_pred(rng)];
      if (std::find(body.begin(), body.end(), p) == body.end()) body.push_back(p);
    }
    std::sort(body.begin(), body.end());
    if (seen.count(body)) continue;
    Rule rule{body, rules.size()};
    IntervalTimeline witness(placement.num_objects, num_events, placement.horizon);
    if (!place_rule(rng, rule, placement, witness)) continue;
    seen.insert(body);
    rules.push_back(std::move(rule));
  }
  return rules;
}

Sample synthesize_sample(std::mt19937_64& rng, std::span<const Rule> chosen_rules,
                         std::span<const Rule> pool, const GenConfig& cfg) {
  const Placement placement = Placement::from(cfg);
  IntervalTimeline timeline(cfg.num_objects, cfg.num_events, cfg.horizon);
  for (const Rule& rule : chosen_rules) {
    if (!place_rule(rng, rule, placement, timeline)) {
      throw std::runtime_error(fmt::format(
          "synthesize_sample: could not place rule {} [{}] within horizon {} after "
          "{} attempts",
          rule.label, describe(rule), cfg.horizon, placement.max_attempts));
    }
  }

  const std::size_t horizon = cfg.horizon;
  std::vector<double> scores(cfg.num_objects * cfg.num_events * horizon);
  std::vector<bool> active(horizon);
  for (std::size_t o = 0; o < cfg.num_objects; ++o) {
    for (std::size_t x = 0; x < cfg.num_events; ++x) {
      std::fill(active.begin(), active.end(), false);
      for (const Interval& iv : timeline.intervals(o, x)) {
        for (std::size_t t = 1; t <= horizon; ++t) {
          const double step = static_cast<double>(t);
          if (iv.start <= step && step <= iv.end) active[t - 1] = true;
        }
      }
      const double mean = cfg.detection_means[x % cfg.detection_means.size()];
      double* row = scores.data() + (o * cfg.num_events + x) * horizon;
      for (std::size_t t = 0; t < horizon; ++t) {
        const double raw = active[t] ? draw(rng, mean, cfg.detection_std)
                                     : std::abs(draw(rng, 0.0, cfg.noise_std));
        // Scores are stored as 32-bit floats on disk; keep memory identical.
        row[t] = static_cast<double>(static_cast<float>(std::clamp(raw, 0.0, 1.0)));
      }
    }
  }

  Sample sample{EventStream(cfg.num_objects, cfg.num_events, horizon, std::move(scores)),
                consistent_rules(timeline, pool), std::move(timeline)};
  for (const Rule& rule : chosen_rules) {
    if (rule.label < sample.labels.size() && !sample.labels.test(rule.label)) {
      throw std::logic_error(fmt::format(
          "synthesize_sample: placed rule {} is not satisfied", rule.label));
    }
  }
  return sample;
}

GeneratedDataset generate(const GenConfig& cfg) {
  cfg.validate();
  GeneratedDataset ds;
  ds.config = cfg;
  ds.event_names = default_event_names(cfg);
  std::mt19937_64 pool_rng(mix_seed(cfg.seed, 0));
  ds.rules = sample_rules(pool_rng, cfg.num_rules, cfg.max_rule_len, cfg.num_events,
                          Placement::from(cfg));

  const std::array<std::pair<Split, std::size_t>, 3> splits = {
      std::pair{Split::Train, cfg.train_count}, std::pair{Split::Val, cfg.val_count},
      std::pair{Split::Test, cfg.test_count}};
  std::uniform_int_distribution<std::size_t> pick_rule(0, ds.rules.size() - 1);
  for (const auto& [split, count] : splits) {
    auto& out = ds.split(split);
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(split) + 1, i));
      std::vector<Rule> chosen;
      chosen.reserve(cfg.rules_per_sample);
      for (std::size_t j = 0; j < cfg.rules_per_sample; ++j) {
        chosen.push_back(ds.rules[pick_rule(rng)]);
      }
      out.push_back(synthesize_sample(rng, chosen, ds.rules, cfg));
    }
  }
  return ds;
}

double mean_active_labels(std::span<const Sample> samples) {
  if (samples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : samples) total += static_cast<double>(s.labels.count());
  return total / static_cast<double>(samples.size());
}

}  // namespace ntlp
