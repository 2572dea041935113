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

#include "ntlp/commands.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ntlp/map_baseline.hpp"
#include "ntlp/parallel.hpp"
#include "ntlp/structure.hpp"

namespace ntlp {

namespace {

std::vector<LabelVector> labels_of(std::span<const Sample> samples) {
  std::vector<LabelVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.labels);
  return out;
}

std::string out_path(const RunConfig& cfg, const char* name) {
  return (std::filesystem::path(cfg.out) / name).string();
}

void require(const std::string& value, const char* what) {
  if (value.empty()) throw std::invalid_argument(fmt::format("{} is required", what));
}

RuleEquality equality(const RunConfig& cfg) {
  return cfg.strict_rules ? RuleEquality::Strict : RuleEquality::Canonical;
}

std::string shape_text(std::size_t k, std::size_t x, std::size_t t, std::size_t r) {
  return fmt::format("(k={}, X={}, T={}, R={})", k, x, t, r);
}

}  // namespace

ModelConfig model_config_for(const GenConfig& gen, const RunConfig& cfg) {
  ModelConfig mc = cfg.model;
  mc.num_objects = gen.num_objects;
  mc.num_events = gen.num_events;
  mc.horizon = gen.horizon;
  mc.num_labels = gen.num_rules;
  mc.validate();
  return mc;
}

TrainConfig train_config_for(const RunConfig& cfg) {
  TrainConfig tc = cfg.train;
  tc.seed = cfg.gen.seed;
  tc.validate();
  return tc;
}

std::size_t search_length(const GenConfig& gen, const RunConfig& cfg) {
  return cfg.n_max == 0 ? gen.max_rule_len : cfg.n_max;
}

Checkpoint train_checkpoint(const GeneratedDataset& ds, const RunConfig& cfg,
                            const std::optional<ModelParams>& stage1,
                            const EpochCallback& on_epoch) {
  cfg.validate();
  const ModelConfig mc = model_config_for(ds.config, cfg);
  const TrainConfig tc = train_config_for(cfg);
  const std::size_t n = search_length(ds.config, cfg);
  const std::size_t c = cfg.candidates_for(n);
  const auto train_labels = labels_of(ds.train);

  Checkpoint ckpt;
  ckpt.max_len = n;
  ckpt.delta = tc.delta;
  ckpt.presence = cfg.presence;
  ckpt.stage = 2;

  if (cfg.stage == "map") {
    ckpt.method = Checkpoint::Method::Map;
    ckpt.params = ModelParams::canonical(mc.num_objects, mc.num_events, mc.horizon,
                                         mc.num_labels);
    const auto relations = compute_relations(ckpt.params, ds.train, tc.threads);
    std::vector<std::vector<std::size_t>> present;
    present.reserve(relations.size());
    for (const auto& r : relations) present.push_back(binarize_relations(r, cfg.presence));
    ckpt.counts = fit_counts(present, train_labels, mc.relation_dim(), mc.num_labels);
    ckpt.heads = map_induce_rules(*ckpt.counts, relations, train_labels, n, c, mc.num_events, tc);
    ckpt.constant_prediction =
        map_predict_labels(train_labels, typical_active_labels(train_labels));
    return ckpt;
  }

  ckpt.method = Checkpoint::Method::Tlp;
  if (stage1) {
    if (!(stage1->config == mc)) {
      throw std::invalid_argument("stage-1 checkpoint does not match the dataset and config");
    }
    ckpt.params = *stage1;
  } else {
    std::mt19937_64 rng(mix_seed(tc.seed, 7));
    ckpt.params =
        train_param_stage(ds.train, ModelParams::initial(mc, rng), tc, ds.val, on_epoch).params;
  }
  const auto relations = compute_relations(ckpt.params, ds.train, tc.threads);
  ckpt.heads = build_heads(ckpt.params.weights, n, c, mc.num_events);
  train_structure_stage(relations, train_labels, ckpt.heads, tc, mc.dropout, on_epoch);
  return ckpt;
}

void check_compatible(const Checkpoint& ckpt, const GenConfig& gen) {
  const ModelConfig& mc = ckpt.params.config;
  if (mc.num_objects != gen.num_objects || mc.num_events != gen.num_events ||
      mc.horizon != gen.horizon || mc.num_labels != gen.num_rules) {
    throw std::invalid_argument(fmt::format(
        "shape mismatch: checkpoint {} vs dataset {}",
        shape_text(mc.num_objects, mc.num_events, mc.horizon, mc.num_labels),
        shape_text(gen.num_objects, gen.num_events, gen.horizon, gen.num_rules)));
  }
}

std::vector<std::vector<RankedRule>> ranked_rules(const Checkpoint& ckpt, std::size_t depth,
                                                  bool distinct) {
  if (ckpt.stage < 2 || ckpt.heads.size() != ckpt.params.config.num_labels) {
    throw std::invalid_argument(
        "checkpoint has no stage-2 attention state; run `train` to completion first");
  }
  std::vector<std::vector<RankedRule>> out;
  out.reserve(ckpt.heads.size());
  for (const auto& h : ckpt.heads) out.push_back(rank_rules(h.logits, h.space, depth, distinct));
  return out;
}

std::vector<std::vector<double>> label_scores(const Checkpoint& ckpt,
                                              std::span<const Sample> samples,
                                              std::size_t threads) {
  if (ckpt.method == Checkpoint::Method::Map) {
    std::vector<double> constant(ckpt.constant_prediction.size());
    for (std::size_t r = 0; r < constant.size(); ++r) {
      constant[r] = ckpt.constant_prediction.test(r) ? 1.0 : 0.0;
    }
    return std::vector<std::vector<double>>(samples.size(), constant);
  }
  auto relations = compute_relations(ckpt.params, samples, threads);
  std::vector<std::vector<double>> out(samples.size());
  parallel_chunks(samples.size(), threads == 0 ? default_threads() : threads,
                  [&](std::size_t, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      out[i] = predict_probabilities(ckpt.params, relations[i]);
                    }
                  });
  return out;
}

EvalReport evaluate(const Checkpoint& ckpt, const GeneratedDataset& ds, const RunConfig& cfg) {
  check_compatible(ckpt, ds.config);
  const auto ranked = ranked_rules(ckpt, cfg.rank_depth, cfg.distinct_rules);
  RankedLists lists(ranked.size());
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    for (const auto& rr : ranked[r]) lists[r].push_back(rr.rule);
  }
  const auto scores = label_scores(ckpt, ds.test, cfg.train.threads);
  const auto ap = mean_average_precision(scores, labels_of(ds.test));
  const char* method = ckpt.method == Checkpoint::Method::Map ? "map" : "tlp";
  return build_report(method, lists, ds.rules, ap, equality(cfg));
}

std::string rules_text(const Checkpoint& ckpt, std::size_t k, bool distinct,
                       std::span<const std::string> event_names) {
  std::string out;
  const auto ranked = ranked_rules(ckpt, k, distinct);
  for (const auto& label : ranked) {
    for (std::size_t i = 0; i < label.size(); ++i) {
      out += format_rule_line({label[i].rule, i + 1, label[i].attention}, event_names);
      out += '\n';
    }
  }
  return out;
}

GeneratedDataset cmd_gen(const RunConfig& cfg, std::ostream& out) {
  cfg.gen.validate();
  GeneratedDataset ds = generate(cfg.gen);
  write_dataset(ds, cfg.out);
  fmt::print(out, "wrote dataset to {}\n", cfg.out);
  fmt::print(out, "train {}  val {}  test {}\n", ds.train.size(), ds.val.size(), ds.test.size());
  fmt::print(out, "mean active labels (train) {:.4f}\n", mean_active_labels(ds.train));
  return ds;
}

Checkpoint cmd_train(const RunConfig& cfg, std::ostream& out) {
  require(cfg.dataset, "--dataset");
  const GeneratedDataset ds = read_dataset(cfg.dataset);
  std::filesystem::create_directories(cfg.out);

  std::optional<ModelParams> stage1;
  if (!cfg.checkpoint.empty()) {
    const Checkpoint prev = read_checkpoint(cfg.checkpoint);
    if (prev.method != Checkpoint::Method::Tlp) {
      throw std::invalid_argument("only model checkpoints can be resumed");
    }
    check_compatible(prev, ds.config);
    stage1 = prev.params;
    fmt::print(out, "resuming from {}; skipping parameter learning\n", cfg.checkpoint);
  }

  std::ofstream log(out_path(cfg, "train_log.txt"), std::ios::trunc);
  if (!log) throw std::runtime_error("cannot write train_log.txt");
  log << "# epoch split loss seconds\n";
  const auto on_epoch = [&](const EpochLog& e) {
    fmt::print(log, "{} {} {:.8g} {:.3f}\n", e.epoch, e.split, e.loss, e.seconds);
    log.flush();
    if (e.split != "val") fmt::print(out, "epoch {} {} loss {:.6f}\n", e.epoch, e.split, e.loss);
  };

  RunConfig run = cfg;
  if (run.stage == "full" && !stage1) {
    // Checkpoint the parameter stage on its own so a later run can resume.
    const ModelConfig mc = model_config_for(ds.config, run);
    const TrainConfig tc = train_config_for(run);
    std::mt19937_64 rng(mix_seed(tc.seed, 7));
    Checkpoint s1;
    s1.method = Checkpoint::Method::Tlp;
    s1.stage = 1;
    s1.max_len = search_length(ds.config, run);
    s1.delta = tc.delta;
    s1.presence = run.presence;
    s1.params =
        train_param_stage(ds.train, ModelParams::initial(mc, rng), tc, ds.val, on_epoch).params;
    write_checkpoint(s1, out_path(cfg, "stage1.ntlc"));
    stage1 = s1.params;
  }
  Checkpoint ckpt = train_checkpoint(ds, run, stage1, on_epoch);
  const std::string path = out_path(cfg, "checkpoint.ntlc");
  write_checkpoint(ckpt, path);
  fmt::print(out, "wrote {}\n", path);
  return ckpt;
}

std::string cmd_induce(const RunConfig& cfg, std::ostream& out) {
  require(cfg.checkpoint, "--checkpoint");
  const Checkpoint ckpt = read_checkpoint(cfg.checkpoint);
  std::vector<std::string> names;
  if (!cfg.dataset.empty()) {
    const GeneratedDataset ds = read_dataset(cfg.dataset);
    check_compatible(ckpt, ds.config);
    names = ds.event_names;
  }
  const std::string text = rules_text(ckpt, cfg.top_k, cfg.distinct_rules, names);
  std::filesystem::create_directories(cfg.out);
  const std::string path = out_path(cfg, "rules.txt");
  write_text(path, text);
  fmt::print(out, "wrote {} rules per label to {}\n", cfg.top_k, path);
  return text;
}

EvalReport cmd_eval(const RunConfig& cfg, std::ostream& out) {
  require(cfg.checkpoint, "--checkpoint");
  require(cfg.dataset, "--dataset");
  const Checkpoint ckpt = read_checkpoint(cfg.checkpoint);
  const GeneratedDataset ds = read_dataset(cfg.dataset);
  const EvalReport report = evaluate(ckpt, ds, cfg);
  std::filesystem::create_directories(cfg.out);
  write_text(out_path(cfg, "report.txt"), report.to_text());
  fmt::print(out, "{:<8} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "method", "hits@1", "hits@5",
             "hits@10", "mAP", "MRR");
  fmt::print(out, "{:<8} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f}\n", report.method,
             report.hits_at_1, report.hits_at_5, report.hits_at_10, report.mean_ap, report.mrr);
  return report;
}

void cmd_inspect(const RunConfig& cfg, std::ostream& out) {
  if (cfg.dataset.empty() && cfg.checkpoint.empty()) {
    throw std::invalid_argument("inspect needs --dataset or --checkpoint");
  }
  if (!cfg.dataset.empty()) {
    const GeneratedDataset ds = read_dataset(cfg.dataset);
    const auto& g = ds.config;
    fmt::print(out, "dataset {}\n", cfg.dataset);
    fmt::print(out, "  objects {}  events {}  horizon {}  labels {}  max rule length {}\n",
               g.num_objects, g.num_events, g.horizon, g.num_rules, g.max_rule_len);
    fmt::print(out, "  train {}  val {}  test {}\n", ds.train.size(), ds.val.size(),
               ds.test.size());
    fmt::print(out, "  mean active labels (train) {:.4f}\n", mean_active_labels(ds.train));
    const std::size_t shown = std::min<std::size_t>(ds.rules.size(), 10);
    for (std::size_t r = 0; r < shown; ++r) {
      fmt::print(out, "  label_{} := {}\n", ds.rules[r].label,
                 format_body(ds.rules[r].body, ds.event_names));
    }
    if (shown < ds.rules.size()) fmt::print(out, "  ... {} more\n", ds.rules.size() - shown);
  }
  if (!cfg.checkpoint.empty()) {
    const Checkpoint ckpt = read_checkpoint(cfg.checkpoint);
    const auto& mc = ckpt.params.config;
    fmt::print(out, "checkpoint {}\n", cfg.checkpoint);
    fmt::print(out, "  method {}  stage {}  max length {}\n",
               ckpt.method == Checkpoint::Method::Map ? "map" : "tlp", ckpt.stage, ckpt.max_len);
    fmt::print(out, "  shapes {}\n",
               shape_text(mc.num_objects, mc.num_events, mc.horizon, mc.num_labels));
    fmt::print(out, "  alpha {:.6g}  beta [{:.6g}, {:.6g}, {:.6g}]  gamma [{:.6g}, {:.6g}, {:.6g}]\n",
               ckpt.params.alpha.item(), ckpt.params.beta.values()[0],
               ckpt.params.beta.values()[1], ckpt.params.beta.values()[2],
               ckpt.params.gamma.values()[0], ckpt.params.gamma.values()[1],
               ckpt.params.gamma.values()[2]);
    if (!ckpt.heads.empty()) {
      fmt::print(out, "  heads {}  combinations per head {}\n", ckpt.heads.size(),
                 ckpt.heads.front().space.size());
    }
  }
}

}  // namespace ntlp
