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

// On-disk formats.
//
// Dataset directory:
//   train.bin, val.bin, test.bin  "NTLP", version 1, u32 LE (m, k, X, T, R),
//                                 then per sample the label bits packed
//                                 LSB first and the scores as f32 LE in
//                                 [object][event][time] order.
//   dataset.txt                   UTF-8 sidecar: generator config, event
//                                 names, ground-truth rules, intervals.
//
// Checkpoint: "NTLC", version 1, u32 section count, then sections of
// (u32 name length, name, u32 rank, u32 dims, f64 LE payload).
//
// Rules text: one line per ranked rule,
//   label_<r> := before(a, b) AND during(c, d) @ rank=1 attention=<value>

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ntlp/datagen.hpp"
#include "ntlp/diffcore.hpp"
#include "ntlp/map_baseline.hpp"
#include "ntlp/metrics.hpp"
#include "ntlp/model.hpp"
#include "ntlp/structure.hpp"

namespace ntlp {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kFormatVersion = 1;

// Datasets.

/// One split as a binary blob.
Bytes encode_split(std::span<const Sample> samples, const GenConfig& cfg);
/// Decodes a split blob; timelines are left empty and are filled in from
/// the sidecar by read_dataset.
std::vector<Sample> decode_split(std::span<const std::uint8_t> bytes,
                                 const GenConfig& cfg);

std::string encode_sidecar(const GeneratedDataset& ds);

void write_dataset(const GeneratedDataset& ds, const std::string& dir);
GeneratedDataset read_dataset(const std::string& dir);

// Rules text.

/// Rule body with event names, e.g. "before(slide_cone, rotate_cube)".
std::string format_body(std::span<const GroundedPredicate> body,
                        std::span<const std::string> event_names);

struct RuleLine {
  Rule rule;
  std::size_t rank = 1;
  double attention = 0.0;

  bool operator==(const RuleLine&) const = default;
};

std::string format_rule_line(const RuleLine& line, std::span<const std::string> event_names);
/// Accepts event names or bare indices. Throws std::invalid_argument.
RuleLine parse_rule_line(std::string_view text, std::span<const std::string> event_names);
std::vector<RuleLine> parse_rules_text(std::string_view text,
                                       std::span<const std::string> event_names);

// Checkpoints.

struct Section {
  std::string name;
  diff::Tensor tensor;

  bool operator==(const Section&) const = default;
};

Bytes encode_sections(std::span<const Section> sections);
std::vector<Section> decode_sections(std::span<const std::uint8_t> bytes);

/// Trained state: stage-1 parameters, optionally stage-2 heads, and for the
/// count baseline its table and constant prediction.
struct Checkpoint {
  enum class Method { Tlp = 0, Map = 1 };

  Method method = Method::Tlp;
  /// 1 after parameter learning, 2 once heads are trained.
  std::size_t stage = 1;
  ModelParams params;
  std::size_t max_len = 1;
  double delta = kDefaultDelta;
  double presence = kDefaultPresence;
  std::vector<LabelHead> heads;
  std::optional<CountTable> counts;
  LabelVector constant_prediction;

  bool operator==(const Checkpoint&) const;
};

Bytes encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

// Files.

Bytes read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);
void write_text(const std::string& path, std::string_view text);
std::string read_text(const std::string& path);

}  // namespace ntlp
