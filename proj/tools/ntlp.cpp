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

// ntlp gen|train|induce|eval|inspect [--config path] [--seed n] [--out dir]
//      [--dataset dir] [--checkpoint path] [--k n] [--stage full|map]
//      [--set key=value]...

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ntlp/commands.hpp"
#include "ntlp/config.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out, dataset, checkpoint, stage;
  std::optional<std::size_t> k;
  std::vector<std::string> overrides;
};

ntlp::RunConfig resolve(const Flags& f) {
  ntlp::RunConfig cfg;
  if (!f.config.empty()) cfg = ntlp::load_config(f.config);
  for (const auto& kv : f.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(fmt::format("--set expects key=value, got '{}'", kv));
    }
    ntlp::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.gen.seed = *f.seed;
  if (f.out) cfg.out = *f.out;
  if (f.dataset) cfg.dataset = *f.dataset;
  if (f.checkpoint) cfg.checkpoint = *f.checkpoint;
  if (f.stage) cfg.stage = *f.stage;
  if (f.k) cfg.top_k = *f.k;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal rule learning on synthetic event streams"};
  app.require_subcommand(1);
  Flags flags;
  app.add_option("--config", flags.config, "key = value config file");
  app.add_option("--seed", flags.seed, "overrides the config seed");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--dataset", flags.dataset, "dataset directory");
  app.add_option("--checkpoint", flags.checkpoint, "checkpoint file");
  app.add_option("--k", flags.k, "rules per label for induce");
  app.add_option("--stage", flags.stage, "full or map");
  app.add_option("--set", flags.overrides, "config override key=value (repeatable)");

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  auto* train = app.add_subcommand("train", "train a checkpoint on a dataset");
  auto* induce = app.add_subcommand("induce", "write the top rules per label");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  auto* inspect = app.add_subcommand("inspect", "summarise a dataset or checkpoint");
  auto* keys = app.add_subcommand("config", "print every config key with its value");
  for (auto* sub : {gen, train, induce, eval, inspect, keys}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const ntlp::RunConfig cfg = resolve(flags);
    if (gen->parsed()) ntlp::cmd_gen(cfg, std::cout);
    if (train->parsed()) ntlp::cmd_train(cfg, std::cout);
    if (induce->parsed()) ntlp::cmd_induce(cfg, std::cout);
    if (eval->parsed()) ntlp::cmd_eval(cfg, std::cout);
    if (inspect->parsed()) ntlp::cmd_inspect(cfg, std::cout);
    if (keys->parsed()) std::cout << ntlp::to_text(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
