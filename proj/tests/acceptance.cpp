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

// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [criterion ...]     default: all of 1..8
//
// Exit status is 0 only when every selected criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ntlp/commands.hpp"
#include "ntlp/core_types.hpp"
#include "ntlp/datagen.hpp"
#include "ntlp/diffcore.hpp"
#include "ntlp/formats.hpp"
#include "ntlp/model.hpp"
#include "ntlp/oracle.hpp"
#include "ntlp/parallel.hpp"
#include "ntlp/training.hpp"

namespace {

using namespace ntlp;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string metrics_line(const EvalReport& r) {
  return fmt::format("hits@1 {:.3f} hits@10 {:.3f} MRR {:.3f} mAP {:.3f}", r.hits_at_1,
                     r.hits_at_10, r.mrr, r.mean_ap);
}

// Both methods on one generated dataset with the default training settings.
std::pair<EvalReport, EvalReport> recovery_run(std::size_t max_len) {
  RunConfig cfg;
  cfg.gen.seed = 1;
  cfg.gen.num_rules = 100;
  cfg.gen.max_rule_len = max_len;
  cfg.gen.num_events = 14;
  cfg.gen.num_objects = 1;
  cfg.gen.rules_per_sample = 1;
  cfg.gen.horizon = 150;
  cfg.gen.train_count = 5000;
  cfg.gen.val_count = 1000;
  cfg.gen.test_count = 1000;
  cfg.train.threads = 0;  // all cores
  const GeneratedDataset ds = generate(cfg.gen);
  std::size_t last = 0;
  const auto progress = [&](const EpochLog& e) {
    if (e.split == "train" && (e.epoch % 10 == 0 || e.epoch + 1 == cfg.train.epochs_param) &&
        e.epoch != last) {
      std::fprintf(stderr, "  [len %zu] epoch %zu loss %.5f\n", max_len, e.epoch, e.loss);
      last = e.epoch;
    }
  };
  const Checkpoint tlp = train_checkpoint(ds, cfg, std::nullopt, progress);
  RunConfig map_cfg = cfg;
  map_cfg.stage = "map";
  const Checkpoint map = train_checkpoint(ds, map_cfg);
  return {evaluate(tlp, ds, cfg), evaluate(map, ds, map_cfg)};
}

Outcome criterion1() {
  const auto [tlp, map] = recovery_run(1);
  const bool tlp_ok = tlp.hits_at_10 >= 0.85;
  const bool map_ok = map.hits_at_10 >= 0.30 && map.hits_at_10 <= 0.75;
  const bool order_ok = tlp.hits_at_10 > map.hits_at_10;
  return {tlp_ok && map_ok && order_ok,
          fmt::format("TLP {} [>= 0.85: {}]; MAP {} [in 0.30..0.75: {}]; TLP > MAP: {}",
                      metrics_line(tlp), tlp_ok ? "yes" : "no", metrics_line(map),
                      map_ok ? "yes" : "no", order_ok ? "yes" : "no")};
}

Outcome criterion2() {
  const auto [tlp, map] = recovery_run(2);
  const double gap = tlp.hits_at_10 - map.hits_at_10;
  std::string lengths;
  for (const auto& [len, s] : tlp.per_length) {
    lengths += fmt::format(" len{} TLP {:.3f} MAP {:.3f};", len, s.hits_at_10,
                           map.per_length.count(len) ? map.per_length.at(len).hits_at_10 : 0.0);
  }
  return {gap >= 0.10, fmt::format("variable-length hits@10 TLP {:.3f} MAP {:.3f} gap {:.3f} "
                                   "[>= 0.10];{}",
                                   tlp.hits_at_10, map.hits_at_10, gap, lengths)};
}

Outcome criterion3() {
  const auto n = unique_rule_space(14, 3, 1);
  return {n == 301, fmt::format("unique_rule_space(14, 3, 1) = {}", n.str())};
}

struct Agreement {
  double rate = 0.0;              // pairs where both intervals have extent
  double rate_with_points = 0.0;  // also counting zero-length intervals
  std::size_t points = 0;
};

// Canonical-model argmax against the oracle on the first 1000 pairs of
// distinct co-occurring events with positive-length intervals. A zero-length
// interval zeroes every score through the suppressor, leaving no argmax;
// such pairs are counted separately.
Agreement oracle_agreement(GenConfig gen) {
  gen.rules_per_sample = 3;
  std::mt19937_64 rng(7);
  const auto pool = sample_rules(rng, 100, 1, gen.num_events, Placement::from(gen));
  const ModelParams params = ModelParams::canonical(1, gen.num_events, gen.horizon, 100);
  std::size_t agree = 0, total = 0, point_agree = 0, points = 0;
  for (std::uint64_t s = 0; total < 1000; ++s) {
    std::mt19937_64 r(mix_seed(99, s));
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<Rule> chosen;
    for (int j = 0; j < 3; ++j) chosen.push_back(pool[pick(r)]);
    const Sample smp = synthesize_sample(r, chosen, pool, gen);
    const auto rel = relation_vector(params, smp.stream);
    for (std::size_t u = 0; u < gen.num_events && total < 1000; ++u) {
      for (std::size_t v = 0; v < gen.num_events && total < 1000; ++v) {
        const auto iu = smp.timeline.intervals(0, u);
        const auto iv = smp.timeline.intervals(0, v);
        if (u == v || iu.size() != 1 || iv.size() != 1) continue;
        const auto triple = std::span<const double>(rel).subspan((u * gen.num_events + v) * 3, 3);
        const bool same = argmax_predicate(triple) == oracle_predicate(iu[0], iv[0]);
        if (iu[0].length() > 0 && iv[0].length() > 0) {
          agree += same;
          ++total;
        } else {
          point_agree += same;
          ++points;
        }
      }
    }
  }
  return {static_cast<double>(agree) / static_cast<double>(total),
          static_cast<double>(agree + point_agree) / static_cast<double>(total + points), points};
}

Outcome criterion4() {
  GenConfig clean;
  clean.detection_means = {1.0};
  clean.detection_std = 0.0;
  clean.noise_std = 0.0;
  GenConfig noisy;
  noisy.detection_means = {1.0};  // default detection_std and noise_std
  const Agreement a_clean = oracle_agreement(clean);
  const Agreement a_noisy = oracle_agreement(noisy);
  const Agreement a_defaults = oracle_agreement(GenConfig{});
  return {a_clean.rate == 1.0 && a_noisy.rate >= 0.95,
          fmt::format("noise-free {:.3f} [== 1]; default noise {:.3f} [>= 0.95]; not part of "
                      "the check: with {} zero-length pairs included {:.3f} / {:.3f}, default "
                      "detection means {:.3f}",
                      a_clean.rate, a_noisy.rate, a_clean.points, a_clean.rate_with_points,
                      a_noisy.rate_with_points, a_defaults.rate)};
}

// Gradient checks: every primitive at 1e-4, the full stage-1 loss at 1e-3.
Outcome criterion5() {
  using diff::Tape;
  using diff::Tensor;
  using diff::Value;
  using Gen = std::function<std::vector<double>(std::mt19937_64&, std::size_t)>;
  auto ws = [](Tape& t, Value y, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> w(y.size());
    for (double& v : w) v = d(rng);
    return diff::dot(diff::reshape(y, {y.size()}), t.constant(Tensor({y.size()}, w)));
  };
  auto konst = [](Tape& t, const diff::Shape& s, std::uint64_t seed, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(diff::numel(s));
    for (double& e : v) e = d(rng);
    return t.constant(Tensor(s, v));
  };
  auto range = [](double lo, double hi) -> Gen {
    return [lo, hi](std::mt19937_64& rng, std::size_t n) {
      std::uniform_real_distribution<double> d(lo, hi);
      std::vector<double> v(n);
      for (double& e : v) e = d(rng);
      return v;
    };
  };
  // Distinct values 0.1 apart so min/max never tie within the step.
  const Gen spread = [](std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> jitter(0.0, 0.025);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = -1.0 + 0.1 * static_cast<double>(i) + jitter(rng);
    std::shuffle(v.begin(), v.end(), rng);
    return v;
  };
  // A fixed partner for min2/max2, and inputs kept 0.05 or more from it.
  const std::vector<double> partner = {-1.0, -0.6, -0.2, 0.2, 0.6, 1.0};
  const Gen off_partner = [&](std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> d(0.05, 0.3);
    std::bernoulli_distribution side(0.5);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = partner[i] + (side(rng) ? d(rng) : -d(rng));
    return v;
  };
  // Away from the clamp bounds 0 and 1.
  const Gen off_bounds = [](std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> d(-1.0, 2.0);
    std::vector<double> v(n);
    for (double& e : v) {
      e = d(rng);
      if (std::abs(e) < 0.01 || std::abs(e - 1) < 0.01) e += 0.05;
    }
    return v;
  };
  struct Case {
    const char* name;
    diff::Shape shape;
    Gen gen;
    std::function<Value(Tape&, Value)> f;
  };
  const auto partner_value = [&](Tape& t) { return t.constant(Tensor({6}, partner)); };
  const std::vector<Case> cases = {
      {"add", {5}, range(-2, 2),
       [&](Tape& t, Value x) { return ws(t, diff::add(x, konst(t, {5}, 1, -2, 2)), 2); }},
      {"sub", {5}, range(-2, 2),
       [&](Tape& t, Value x) { return ws(t, diff::sub(konst(t, {5}, 3, -2, 2), x), 4); }},
      {"mul", {5}, range(-2, 2),
       [&](Tape& t, Value x) { return ws(t, diff::mul(x, konst(t, {5}, 5, -2, 2)), 6); }},
      {"div", {5}, range(0.5, 2),
       [&](Tape& t, Value x) { return ws(t, diff::div(konst(t, {5}, 7, -2, 2), x), 8); }},
      {"min2", {6}, off_partner,
       [&](Tape& t, Value x) { return ws(t, diff::min2(x, partner_value(t)), 9); }},
      {"max2", {6}, off_partner,
       [&](Tape& t, Value x) { return ws(t, diff::max2(partner_value(t), x), 10); }},
      {"add_scalar", {4}, range(-2, 2),
       [&](Tape& t, Value x) { return ws(t, diff::add_scalar(x, 0.7), 11); }},
      {"scale", {4}, range(-2, 2),
       [&](Tape& t, Value x) { return ws(t, diff::scale(x, -1.3), 12); }},
      {"scale_by_value", {}, range(-2, 2),
       [&](Tape& t, Value s) { return ws(t, diff::scale(konst(t, {4}, 13, -1, 1), s), 14); }},
      {"clamp", {8}, off_bounds,
       [&](Tape& t, Value x) { return ws(t, diff::clamp(x, 0.0, 1.0), 15); }},
      {"sigmoid", {4}, range(-3, 3), [&](Tape& t, Value x) { return ws(t, diff::sigmoid(x), 16); }},
      {"sum", {5}, range(-2, 2), [](Tape&, Value x) { return diff::sum(diff::mul(x, x)); }},
      {"mean", {5}, range(-2, 2), [](Tape&, Value x) { return diff::mean(diff::mul(x, x)); }},
      {"sum_abs", {6}, spread, [](Tape&, Value x) { return diff::sum_abs(diff::add_scalar(x, 0.05)); }},
      {"dot", {5}, range(-2, 2), [](Tape&, Value x) { return diff::dot(x, diff::sigmoid(x)); }},
      {"reduce_min", {3, 4}, spread,
       [&](Tape& t, Value x) { return ws(t, diff::reduce_min(x), 17); }},
      {"reduce_max", {3, 4}, spread,
       [&](Tape& t, Value x) { return ws(t, diff::reduce_max(x), 18); }},
      {"vecmat", {4, 3}, range(-1, 1),
       [&](Tape& t, Value w) {
         return ws(t, diff::sigmoid(diff::vecmat(konst(t, {4}, 19, -1, 1), w)), 20);
       }},
      {"matvec", {5}, range(-1, 1),
       [&](Tape& t, Value a) {
         return ws(t, diff::sigmoid(diff::matvec(konst(t, {3, 5}, 21, -1, 1), a)), 22);
       }},
      {"conv1d", {3, 3}, range(0, 1),
       [&](Tape& t, Value k) {
         return ws(t, diff::sigmoid(diff::conv1d_valid(konst(t, {2, 3, 9}, 23, 0, 1), k, 2)), 24);
       }},
      {"softmax", {2, 3}, range(-3, 3),
       [&](Tape& t, Value x) { return ws(t, diff::softmax(x), 25); }},
      {"reshape", {2, 3}, range(-1, 1),
       [&](Tape& t, Value x) { return ws(t, diff::sigmoid(diff::reshape(x, {3, 2})), 26); }},
      {"gather", {4}, range(-1, 1),
       [&](Tape& t, Value x) {
         return ws(t, diff::sigmoid(diff::gather(x, {3, 0, 0, 2}, {4})), 27);
       }},
      {"broadcast_last", {3}, range(-1, 1),
       [&](Tape& t, Value x) { return ws(t, diff::sigmoid(diff::broadcast_last(x, 4)), 28); }},
      {"concat", {3}, range(-1, 1),
       [&](Tape& t, Value x) {
         return ws(t, diff::sigmoid(diff::concat({x, diff::mul(x, x)})), 29);
       }},
      {"sum_blocks", {4, 3}, range(-1, 1),
       [&](Tape& t, Value x) { return ws(t, diff::sigmoid(diff::sum_blocks(x, {3})), 30); }},
      {"dropout", {8}, range(-1, 1),
       [&](Tape& t, Value x) {
         std::mt19937_64 rng(31);  // same mask every evaluation
         return ws(t, diff::sigmoid(diff::dropout(x, 0.3, rng, true)), 32);
       }},
      {"binary_cross_entropy", {6}, range(0.1, 0.9),
       [](Tape&, Value p) {
         const std::vector<double> y = {1, 0, 1, 1, 0, 0};
         return diff::binary_cross_entropy(p, y);
       }},
  };
  double worst_primitive = 0.0;
  std::string worst_name = "none";
  for (const auto& c : cases) {
    std::mt19937_64 rng(std::hash<std::string>{}(c.name));
    for (int trial = 0; trial < 50; ++trial) {
      const double err =
          diff::grad_check(c.f, Tensor(c.shape, c.gen(rng, diff::numel(c.shape))), 1e-3);
      if (err > worst_primitive) {
        worst_primitive = err;
        worst_name = c.name;
      }
    }
  }

  // Full stage-1 loss on a one-object, three-event, T = 20 toy.
  GenConfig gen;
  gen.seed = 9;
  gen.num_rules = 4;
  gen.num_events = 3;
  gen.horizon = 20;
  gen.interval_len_min = 2;
  gen.interval_len_max = 5;
  gen.train_count = 6;
  gen.val_count = 1;
  gen.test_count = 1;
  const GeneratedDataset ds = generate(gen);
  ModelConfig mc;
  mc.num_events = 3;
  mc.horizon = 20;
  mc.num_labels = 4;
  std::mt19937_64 rng(10);
  ModelParams p = ModelParams::initial(mc, rng);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (double& k : p.kernels.values()) k = 0.4 + 0.3 * d(rng);
  p.alpha[0] = 0.9;
  for (double& b : p.beta.values()) b = 0.3 * d(rng);
  for (double& g : p.gamma.values()) g = 1.0 + 0.3 * d(rng);
  std::vector<const Sample*> batch;
  for (const auto& s : ds.train) batch.push_back(&s);
  const TrainConfig tc;
  ParamGrads grads = ParamGrads::zeros_like(p);
  param_batch_loss(p, batch, tc, 77, grads);
  auto loss_at = [&](const ModelParams& q) {
    ParamGrads scratch = ParamGrads::zeros_like(q);
    return param_batch_loss(q, batch, tc, 77, scratch);
  };
  double worst_full = 0.0;
  constexpr double h = 1e-6;
  auto probe = [&](diff::Tensor ModelParams::*field, const diff::Tensor ParamGrads::*grad) {
    for (std::size_t i = 0; i < (p.*field).size(); i += std::max<std::size_t>(1, (p.*field).size() / 8)) {
      ModelParams plus = p, minus = p;
      (plus.*field)[i] += h;
      (minus.*field)[i] -= h;
      const double numeric = (loss_at(plus) - loss_at(minus)) / (2 * h);
      const double analytic = (grads.*grad)[i];
      const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
      worst_full = std::max(worst_full, std::abs(numeric - analytic) / scale);
    }
  };
  probe(&ModelParams::kernels, &ParamGrads::kernels);
  probe(&ModelParams::alpha, &ParamGrads::alpha);
  probe(&ModelParams::beta, &ParamGrads::beta);
  probe(&ModelParams::gamma, &ParamGrads::gamma);
  probe(&ModelParams::weights, &ParamGrads::weights);

  return {worst_primitive <= 1e-4 && worst_full <= 1e-3,
          fmt::format("{} primitives, worst {:.2e} ({}) [<= 1e-4]; full loss worst {:.2e} "
                      "[<= 1e-3]",
                      cases.size(), worst_primitive, worst_name, worst_full)};
}

RunConfig small_run(std::size_t threads) {
  RunConfig cfg;
  cfg.gen.seed = 5;
  cfg.gen.num_rules = 20;
  cfg.gen.max_rule_len = 2;
  cfg.gen.num_events = 6;
  cfg.gen.horizon = 60;
  cfg.gen.train_count = 300;
  cfg.gen.val_count = 50;
  cfg.gen.test_count = 100;
  cfg.train.epochs_param = 5;
  cfg.train.batch_param = 64;
  cfg.train.threads = threads;
  return cfg;
}

Outcome criterion6() {
  std::vector<std::string> notes;
  bool ok = true;
  Bytes serial_ckpt;
  for (std::size_t threads : {std::size_t{1}, std::size_t{4}}) {
    const RunConfig cfg = small_run(threads);
    Bytes ckpt[2];
    std::string report[2];
    EvalReport metrics[2];
    for (int run = 0; run < 2; ++run) {
      const GeneratedDataset ds = generate(cfg.gen);
      const Checkpoint c = train_checkpoint(ds, cfg);
      ckpt[run] = encode_checkpoint(c);
      metrics[run] = evaluate(c, ds, cfg);
      report[run] = metrics[run].to_text();
    }
    const bool bytes_same = ckpt[0] == ckpt[1] && report[0] == report[1];
    const bool metrics_same = metrics[0] == metrics[1];
    ok = ok && (threads == 1 ? bytes_same : metrics_same);
    notes.push_back(fmt::format("threads={} checkpoints+reports byte-identical {} metrics "
                                "identical {}",
                                threads, bytes_same ? "yes" : "no",
                                metrics_same ? "yes" : "no"));
    if (threads == 1) {
      serial_ckpt = ckpt[0];
    } else {
      notes.push_back(fmt::format("serial vs parallel checkpoint identical {}",
                                  serial_ckpt == ckpt[0] ? "yes" : "no"));
    }
  }
  return {ok, fmt::format("{}", fmt::join(notes, "; "))};
}

Outcome criterion7() {
  const fs::path dir = fs::temp_directory_path() / "ntlp_acceptance_c7";
  fs::remove_all(dir);
  const RunConfig cfg = small_run(1);
  const GeneratedDataset ds = generate(cfg.gen);
  write_dataset(ds, (dir / "a").string());
  write_dataset(read_dataset((dir / "a").string()), (dir / "b").string());
  bool data_ok = true;
  for (const char* f : {"train.bin", "val.bin", "test.bin", "dataset.txt"}) {
    data_ok = data_ok && read_file((dir / "a" / f).string()) == read_file((dir / "b" / f).string());
  }
  bool ckpt_ok = true, rules_ok = true;
  for (const char* stage : {"full", "map"}) {
    RunConfig run = cfg;
    run.stage = stage;
    const Checkpoint c = train_checkpoint(ds, run);
    const auto path = (dir / (std::string(stage) + ".ntlc")).string();
    write_checkpoint(c, path);
    const Checkpoint back = read_checkpoint(path);
    ckpt_ok = ckpt_ok && back == c && encode_checkpoint(back) == read_file(path);

    const std::string text = rules_text(c, 10, true, ds.event_names);
    const auto lines = parse_rules_text(text, ds.event_names);
    const auto ranked = ranked_rules(c, 10, true);
    std::size_t k = 0;
    for (const auto& list : ranked) {
      for (const auto& rr : list) {
        rules_ok = rules_ok && k < lines.size() && lines[k].rule == rr.rule &&
                   lines[k].attention == rr.attention;
        ++k;
      }
    }
    rules_ok = rules_ok && k == lines.size();
  }
  fs::remove_all(dir);
  return {data_ok && ckpt_ok && rules_ok,
          fmt::format("dataset write-read-write identical {}; checkpoints (model, count "
                      "baseline) identical {}; rule text lossless {}",
                      data_ok ? "yes" : "no", ckpt_ok ? "yes" : "no", rules_ok ? "yes" : "no")};
}

Outcome criterion8() {
  return {true,
          "not reproducible at desk scale, stated: the video benchmark results (Hits .91/.95, "
          "mAP .69, generalization) need the out-of-scope vision pipeline, and the clinical "
          "results (3 relevant rules @50, MRR .04, mAP .77) need restricted data; criteria "
          "1-7 replace them"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::function<Outcome()>> criteria = {
      {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6}, {7, criterion7}, {8, criterion8}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  if (selected.empty()) {
    for (const auto& [id, fn] : criteria) selected.insert(id);
  }
  bool all = true;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", id);
      return 2;
    }
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("error: {}", e.what())};
    }
    all = all && o.pass;
    fmt::print("criterion {}: {}  {} ({:.1f}s)\n", id, o.pass ? "PASS" : "FAIL", o.detail,
               seconds_since(t0));
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
