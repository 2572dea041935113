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

#include <bit>
#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "ntlp/commands.hpp"
#include "ntlp/formats.hpp"

namespace ntlp {
namespace {

namespace fs = std::filesystem;
using K = PredicateKind;

fs::path scratch_dir() {
  const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  const fs::path dir = fs::temp_directory_path() /
                       (std::string("ntlp_formats_") + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

GenConfig small_gen() {
  GenConfig g;
  g.seed = 12;
  g.num_rules = 5;
  g.max_rule_len = 2;
  g.num_events = 4;
  g.num_objects = 2;
  g.horizon = 30;
  g.interval_len_min = 2;
  g.interval_len_max = 6;
  g.train_count = 24;
  g.val_count = 6;
  g.test_count = 6;
  return g;
}

RunConfig small_run(const std::string& stage) {
  RunConfig cfg;
  cfg.gen = small_gen();
  cfg.stage = stage;
  cfg.train.epochs_param = 2;
  cfg.train.batch_param = 8;
  cfg.train.batch_struct = 8;
  cfg.candidates = {6, 5};
  return cfg;
}

std::string error_of(auto&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

TEST(SplitFormat, HeaderAndRoundTrip) {
  const GeneratedDataset ds = generate(small_gen());
  const Bytes bytes = encode_split(ds.train, ds.config);
  ASSERT_GE(bytes.size(), 25u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NTLP");
  EXPECT_EQ(bytes[4], kFormatVersion);
  EXPECT_EQ(bytes[5], 24u);  // m, little endian
  EXPECT_EQ(bytes[6], 0u);
  const auto back = decode_split(bytes, ds.config);
  ASSERT_EQ(back.size(), ds.train.size());
  for (std::size_t s = 0; s < back.size(); ++s) {
    EXPECT_EQ(back[s].labels, ds.train[s].labels);
    const auto& a = back[s].stream;
    const auto& b = ds.train[s].stream;
    for (std::size_t o = 0; o < 2; ++o) {
      for (std::size_t e = 0; e < 4; ++e) {
        for (std::size_t t = 0; t < 30; ++t) {
          // Scores travel as f32.
          EXPECT_EQ(a.at(o, e, t), static_cast<double>(static_cast<float>(b.at(o, e, t))));
        }
      }
    }
  }
  EXPECT_EQ(encode_split(back, ds.config), bytes);
}

TEST(SplitFormat, TruncationAndHeaderErrors) {
  const GeneratedDataset ds = generate(small_gen());
  const Bytes bytes = encode_split(ds.val, ds.config);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, bytes.size() - 1}) {
    const Bytes part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(decode_split(part, ds.config), std::exception) << cut;
  }
  Bytes bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_split(bad, ds.config), std::exception);
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(decode_split(bad, ds.config), std::exception);
  GenConfig other = ds.config;
  other.horizon = 31;
  EXPECT_THROW(decode_split(bytes, other), std::exception);
  Bytes longer = bytes;
  longer.push_back(0);
  EXPECT_THROW(decode_split(longer, ds.config), std::exception);
}

TEST(DatasetFormat, WriteReadWriteIsByteIdentical) {
  const fs::path dir = scratch_dir();
  const GeneratedDataset ds = generate(small_gen());
  write_dataset(ds, (dir / "a").string());
  const GeneratedDataset back = read_dataset((dir / "a").string());
  EXPECT_EQ(back.config, ds.config);
  EXPECT_EQ(back.event_names, ds.event_names);
  EXPECT_EQ(back.rules, ds.rules);
  ASSERT_EQ(back.test.size(), ds.test.size());
  for (std::size_t s = 0; s < ds.test.size(); ++s) {
    EXPECT_EQ(back.test[s].timeline, ds.test[s].timeline);
    EXPECT_EQ(back.test[s].labels, ds.test[s].labels);
  }
  write_dataset(back, (dir / "b").string());
  for (const char* f : {"train.bin", "val.bin", "test.bin", "dataset.txt"}) {
    EXPECT_EQ(read_file((dir / "a" / f).string()), read_file((dir / "b" / f).string())) << f;
  }
}

TEST(DatasetFormat, SidecarErrorsNameTheLine) {
  const fs::path dir = scratch_dir();
  write_dataset(generate(small_gen()), dir.string());
  std::string text = read_text((dir / "dataset.txt").string());
  const auto at = text.find("[rules]");
  ASSERT_NE(at, std::string::npos);
  text.insert(text.find('\n', at) + 1, "label_0 := sideways(0, 1)\n");
  write_text((dir / "dataset.txt").string(), text);
  const std::string msg = error_of([&] { read_dataset(dir.string()); });
  EXPECT_NE(msg.find("line"), std::string::npos) << msg;
  fs::remove(dir / "val.bin");
  EXPECT_THROW(read_dataset(dir.string()), std::exception);
}

TEST(RulesText, FormatAndParse) {
  const std::vector<std::string> names = {"slide_cone", "rotate_cube", "lift_ball"};
  const RuleLine line{{{{K::Before, 0, 1}, {K::During, 2, 0}}, 3}, 2, 0.125};
  const std::string text = format_rule_line(line, names);
  EXPECT_EQ(text,
            "label_3 := before(slide_cone, rotate_cube) AND during(lift_ball, slide_cone) "
            "@ rank=2 attention=0.125");
  EXPECT_EQ(parse_rule_line(text, names), line);
  EXPECT_EQ(parse_rule_line("label_3 := before(0, 1) AND during(2, 0) @ rank=2 attention=0.125",
                            names),
            line);
  // The rank/attention suffix is optional for hand-written rules.
  const RuleLine bare = parse_rule_line("label_3 := before(0, 1)", names);
  EXPECT_EQ(bare.rule, (Rule{{{K::Before, 0, 1}}, 3}));
  EXPECT_EQ(bare.rank, 1u);
  EXPECT_THROW(parse_rule_line("label_3 before(0, 1)", names), std::invalid_argument);
  EXPECT_THROW(parse_rule_line("label_3 := behind(0, 1) @ rank=1 attention=1", names),
               std::invalid_argument);
  EXPECT_THROW(parse_rule_line("label_3 := before(0, 9) @ rank=1 attention=1", names),
               std::invalid_argument);
}

TEST(RulesText, RandomRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<std::size_t> ev(0, 5), kind(0, 2), len(1, 4);
  std::uniform_real_distribution<double> att(0.0, 1.0);
  const std::vector<std::string> names = {"a", "b", "c", "d", "e", "f"};
  std::string text;
  std::vector<RuleLine> lines;
  for (std::size_t i = 0; i < 200; ++i) {
    RuleLine l;
    for (std::size_t n = len(rng); n > 0; --n) {
      l.rule.body.push_back({static_cast<K>(kind(rng)), ev(rng), ev(rng)});
    }
    l.rule.label = i % 7;
    l.rank = 1 + i % 10;
    l.attention = att(rng);
    text += format_rule_line(l, names) + "\n";
    lines.push_back(l);
  }
  EXPECT_EQ(parse_rules_text(text, names), lines);
}

TEST(Sections, RoundTripAndTruncation) {
  std::vector<Section> sections = {{"scalar", diff::Tensor({}, 2.5)},
                                   {"matrix", diff::Tensor({2, 3})},
                                   {"empty", diff::Tensor({0})}};
  auto m = sections[1].tensor.values();
  for (std::size_t i = 0; i < 6; ++i) m[i] = std::ldexp(1.0, -static_cast<int>(i)) - 0.3;
  m[5] = -0.0;
  const Bytes bytes = encode_sections(sections);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NTLC");
  const auto back = decode_sections(bytes);
  EXPECT_EQ(back, sections);
  EXPECT_TRUE(std::signbit(back[1].tensor.values()[5]));
  for (std::size_t cut = 0; cut < bytes.size(); cut += 7) {
    const Bytes part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_NE(error_of([&] { decode_sections(part); }).find("truncated"), std::string::npos)
        << cut;
  }
}

class CheckpointFormat : public ::testing::TestWithParam<std::string> {};

TEST_P(CheckpointFormat, EncodeDecodeEncodeIsByteIdentical) {
  const RunConfig cfg = small_run(GetParam());
  const GeneratedDataset ds = generate(cfg.gen);
  const Checkpoint ckpt = train_checkpoint(ds, cfg);
  const Bytes bytes = encode_checkpoint(ckpt);
  const Checkpoint back = decode_checkpoint(bytes);
  EXPECT_EQ(back, ckpt);
  EXPECT_EQ(encode_checkpoint(back), bytes);

  const fs::path dir = scratch_dir();
  write_checkpoint(ckpt, (dir / "c.ntlc").string());
  EXPECT_EQ(read_checkpoint((dir / "c.ntlc").string()), ckpt);

  for (std::size_t cut : {std::size_t{2}, bytes.size() / 2, bytes.size() - 1}) {
    const Bytes part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(decode_checkpoint(part), std::exception) << cut;
  }
}

INSTANTIATE_TEST_SUITE_P(Methods, CheckpointFormat, ::testing::Values("full", "map"));

TEST(CheckpointFormat, StageOneOnlyRoundTrips) {
  Checkpoint c;
  std::mt19937_64 rng(2);
  ModelConfig mc;
  mc.num_objects = 1;
  mc.num_events = 3;
  mc.horizon = 20;
  mc.num_labels = 2;
  c.params = ModelParams::initial(mc, rng);
  EXPECT_EQ(decode_checkpoint(encode_checkpoint(c)), c);
}

TEST(CheckpointFormat, MissingSectionIsAnError) {
  std::mt19937_64 rng(2);
  ModelConfig mc;
  mc.num_objects = 1;
  mc.num_events = 3;
  mc.horizon = 20;
  mc.num_labels = 2;
  Checkpoint c;
  c.params = ModelParams::initial(mc, rng);
  auto sections = decode_sections(encode_checkpoint(c));
  std::erase_if(sections, [](const Section& s) { return s.name == "param.weights"; });
  const std::string msg = error_of([&] { decode_checkpoint(encode_sections(sections)); });
  EXPECT_NE(msg.find("param.weights"), std::string::npos) << msg;
}

}  // namespace
}  // namespace ntlp
