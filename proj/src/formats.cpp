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

#include "ntlp/formats.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "ntlp/config.hpp"

namespace ntlp {

namespace {

constexpr std::array<char, 4> kDatasetMagic = {'N', 'T', 'L', 'P'};
constexpr std::array<char, 4> kCheckpointMagic = {'N', 'T', 'L', 'C'};

constexpr std::array<const char*, 15> kGenKeys = {
    "seed",          "num_rules",        "max_rule_len",     "num_events",
    "num_objects",   "horizon",          "rules_per_sample", "detection_means",
    "detection_std", "noise_std",        "interval_len_min", "interval_len_max",
    "train_count",   "val_count",        "test_count"};

constexpr std::array<std::pair<Split, const char*>, 3> kSplits = {
    std::pair{Split::Train, "train"}, std::pair{Split::Val, "val"},
    std::pair{Split::Test, "test"}};

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(Bytes& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_magic(Bytes& out, const std::array<char, 4>& magic) {
  for (char c : magic) out.push_back(static_cast<std::uint8_t>(c));
  out.push_back(kFormatVersion);
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > std::numeric_limits<std::uint32_t>::max()) {
    throw std::length_error(fmt::format("{} = {} does not fit in 32 bits", what, v));
  }
  return static_cast<std::uint32_t>(v);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw std::runtime_error(fmt::format("truncated input at byte {}", pos_));
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * i);
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void magic(const std::array<char, 4>& expected, const char* what) {
    for (char c : expected) {
      if (u8() != static_cast<std::uint8_t>(c)) {
        throw std::runtime_error(fmt::format("{}: bad magic bytes", what));
      }
    }
    const std::uint8_t version = u8();
    if (version != kFormatVersion) {
      throw std::runtime_error(fmt::format("{}: unsupported version {}", what, version));
    }
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text = text.substr(nl + 1);
  }
  return lines;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T to_number(std::string_view text, const char* what) {
  T value{};
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::invalid_argument(fmt::format("{}: bad number '{}'", what, text));
  }
  return value;
}

std::size_t event_index(std::string_view token, std::span<const std::string> names) {
  token = trim(token);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == token) return i;
  }
  const auto idx = to_number<std::size_t>(token, "rule text event");
  if (!names.empty() && idx >= names.size()) {
    throw std::invalid_argument(fmt::format("rule text: event {} out of range", idx));
  }
  return idx;
}

std::string event_name(std::size_t idx, std::span<const std::string> names) {
  return idx < names.size() ? names[idx] : fmt::format("{}", idx);
}

GroundedPredicate parse_predicate(std::string_view text, std::span<const std::string> names) {
  text = trim(text);
  const auto open = text.find('(');
  const auto comma = text.find(',');
  const auto close = text.rfind(')');
  if (open == std::string_view::npos || comma == std::string_view::npos ||
      close != text.size() - 1 || !(open < comma && comma < close)) {
    throw std::invalid_argument(fmt::format("rule text: bad predicate '{}'", text));
  }
  const auto kind = parse_predicate_kind(trim(text.substr(0, open)));
  if (!kind) {
    throw std::invalid_argument(fmt::format("rule text: unknown predicate in '{}'", text));
  }
  return {*kind, event_index(text.substr(open + 1, comma - open - 1), names),
          event_index(text.substr(comma + 1, close - comma - 1), names)};
}

diff::Tensor scalar_tensor(double v) { return diff::Tensor::scalar(v); }

diff::Tensor index_tensor(std::span<const std::size_t> values) {
  std::vector<double> data(values.begin(), values.end());
  return diff::Tensor({values.size()}, std::move(data));
}

}  // namespace

Bytes encode_split(std::span<const Sample> samples, const GenConfig& cfg) {
  Bytes out;
  put_magic(out, kDatasetMagic);
  put_u32(out, checked_u32(samples.size(), "sample count"));
  put_u32(out, checked_u32(cfg.num_objects, "num_objects"));
  put_u32(out, checked_u32(cfg.num_events, "num_events"));
  put_u32(out, checked_u32(cfg.horizon, "horizon"));
  put_u32(out, checked_u32(cfg.num_rules, "num_rules"));
  const std::size_t label_bytes = (cfg.num_rules + 7) / 8;
  const std::size_t cells = cfg.num_objects * cfg.num_events * cfg.horizon;
  out.reserve(out.size() + samples.size() * (label_bytes + 4 * cells));
  for (const auto& s : samples) {
    if (s.labels.size() != cfg.num_rules || s.stream.scores().size() != cells) {
      throw std::invalid_argument("encode_split: sample shape disagrees with the config");
    }
    for (std::size_t b = 0; b < label_bytes; ++b) {
      std::uint8_t byte = 0;
      for (std::size_t bit = 0; bit < 8 && b * 8 + bit < cfg.num_rules; ++bit) {
        if (s.labels.test(b * 8 + bit)) byte |= static_cast<std::uint8_t>(1u << bit);
      }
      out.push_back(byte);
    }
    for (double v : s.stream.scores()) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

std::vector<Sample> decode_split(std::span<const std::uint8_t> bytes, const GenConfig& cfg) {
  Reader in(bytes);
  in.magic(kDatasetMagic, "dataset");
  const std::uint32_t m = in.u32(), k = in.u32(), x = in.u32(), t = in.u32(), r = in.u32();
  if (k != cfg.num_objects || x != cfg.num_events || t != cfg.horizon || r != cfg.num_rules) {
    throw std::runtime_error(fmt::format(
        "dataset: header (k={}, X={}, T={}, R={}) disagrees with sidecar (k={}, X={}, T={}, "
        "R={})",
        k, x, t, r, cfg.num_objects, cfg.num_events, cfg.horizon, cfg.num_rules));
  }
  const std::size_t label_bytes = (r + 7) / 8;
  const std::size_t cells = std::size_t{k} * x * t;
  in.need(std::size_t{m} * (label_bytes + 4 * cells));
  std::vector<Sample> out;
  out.reserve(m);
  for (std::uint32_t s = 0; s < m; ++s) {
    LabelVector labels(r);
    for (std::size_t b = 0; b < label_bytes; ++b) {
      const std::uint8_t byte = in.u8();
      for (std::size_t bit = 0; bit < 8 && b * 8 + bit < r; ++bit) {
        labels.set(b * 8 + bit, (byte >> bit) & 1u);
      }
    }
    std::vector<double> scores(cells);
    for (double& v : scores) v = static_cast<double>(std::bit_cast<float>(in.u32()));
    out.push_back({EventStream(k, x, t, std::move(scores)), std::move(labels),
                   IntervalTimeline(k, x, t)});
  }
  if (!in.done()) throw std::runtime_error("dataset: trailing bytes");
  return out;
}

std::string format_body(std::span<const GroundedPredicate> body,
                        std::span<const std::string> event_names) {
  std::string out;
  for (const auto& p : body) {
    if (!out.empty()) out += " AND ";
    out += fmt::format("{}({}, {})", to_string(p.kind), event_name(p.u, event_names),
                       event_name(p.v, event_names));
  }
  return out;
}

std::string format_rule_line(const RuleLine& line, std::span<const std::string> event_names) {
  return fmt::format("label_{} := {} @ rank={} attention={}", line.rule.label,
                     format_body(line.rule.body, event_names), line.rank, line.attention);
}

RuleLine parse_rule_line(std::string_view text, std::span<const std::string> event_names) {
  text = trim(text);
  const auto assign = text.find(":=");
  if (text.substr(0, 6) != "label_" || assign == std::string_view::npos) {
    throw std::invalid_argument(fmt::format("rule text: expected 'label_<r> := ...' in '{}'",
                                            text));
  }
  RuleLine line;
  line.rule.label = to_number<std::size_t>(text.substr(6, assign - 6), "rule label");
  std::string_view body = text.substr(assign + 2);
  if (const auto at = body.find('@'); at != std::string_view::npos) {
    for (auto token : split_ws(body.substr(at + 1))) {
      if (token.substr(0, 5) == "rank=") {
        line.rank = to_number<std::size_t>(token.substr(5), "rule rank");
      } else if (token.substr(0, 10) == "attention=") {
        line.attention = to_number<double>(token.substr(10), "rule attention");
      } else {
        throw std::invalid_argument(fmt::format("rule text: unknown field '{}'", token));
      }
    }
    body = body.substr(0, at);
  }
  body = trim(body);
  while (!body.empty()) {
    const auto sep = body.find(" AND ");
    line.rule.body.push_back(parse_predicate(body.substr(0, sep), event_names));
    if (sep == std::string_view::npos) break;
    body = body.substr(sep + 5);
  }
  if (line.rule.body.empty()) throw std::invalid_argument("rule text: empty body");
  return line;
}

std::vector<RuleLine> parse_rules_text(std::string_view text,
                                       std::span<const std::string> event_names) {
  std::vector<RuleLine> out;
  for (auto line : split_lines(text)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(parse_rule_line(line, event_names));
  }
  return out;
}

std::string encode_sidecar(const GeneratedDataset& ds) {
  RunConfig run;
  run.gen = ds.config;
  std::string out = "# ntlp dataset sidecar\nversion = 1\n\n[config]\n";
  for (const char* key : kGenKeys) out += fmt::format("{} = {}\n", key, get_config_value(run, key));
  out += "\n[events]\n";
  for (std::size_t x = 0; x < ds.event_names.size(); ++x) {
    out += fmt::format("{} {}\n", x, ds.event_names[x]);
  }
  out += "\n[rules]\n";
  for (const auto& rule : ds.rules) {
    out += fmt::format("label_{} := {}\n", rule.label, format_body(rule.body, ds.event_names));
  }
  out += "\n[intervals]\n# split sample object event start end\n";
  for (const auto& [split, name] : kSplits) {
    const auto& samples = ds.split(split);
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const auto& tl = samples[s].timeline;
      for (std::size_t o = 0; o < tl.num_objects(); ++o) {
        for (std::size_t x = 0; x < tl.num_events(); ++x) {
          for (const auto& iv : tl.intervals(o, x)) {
            out += fmt::format("{} {} {} {} {} {}\n", name, s, o, x, iv.start, iv.end);
          }
        }
      }
    }
  }
  return out;
}

void write_dataset(const GeneratedDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [split, name] : kSplits) {
    write_file(fmt::format("{}/{}.bin", dir, name), encode_split(ds.split(split), ds.config));
  }
  write_text(dir + "/dataset.txt", encode_sidecar(ds));
}

GeneratedDataset read_dataset(const std::string& dir) {
  const std::string sidecar = read_text(dir + "/dataset.txt");
  GeneratedDataset ds;
  RunConfig run;
  std::string section;
  struct Pending {
    Split split;
    std::size_t sample, object, event;
    Interval iv;
  };
  std::vector<Pending> intervals;
  std::size_t line_no = 0;
  for (auto line : split_lines(sidecar)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      section = std::string(line);
      continue;
    }
    try {
      if (section.empty()) {
        if (line != "version = 1") {
          throw std::runtime_error(fmt::format("unexpected '{}'", line));
        }
      } else if (section == "[config]") {
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw std::runtime_error("expected key = value");
        set_config_value(run, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
      } else if (section == "[events]") {
        const auto parts = split_ws(line);
        if (parts.size() != 2 || to_number<std::size_t>(parts[0], "event") != ds.event_names.size()) {
          throw std::runtime_error("bad event line");
        }
        ds.event_names.emplace_back(parts[1]);
      } else if (section == "[rules]") {
        ds.rules.push_back(parse_rule_line(line, ds.event_names).rule);
      } else if (section == "[intervals]") {
        const auto parts = split_ws(line);
        if (parts.size() != 6) throw std::runtime_error("bad interval line");
        Split split = Split::Train;
        bool known = false;
        for (const auto& [s, name] : kSplits) {
          if (parts[0] == name) {
            split = s;
            known = true;
          }
        }
        if (!known) throw std::runtime_error("unknown split");
        intervals.push_back({split, to_number<std::size_t>(parts[1], "sample"),
                             to_number<std::size_t>(parts[2], "object"),
                             to_number<std::size_t>(parts[3], "event"),
                             {to_number<double>(parts[4], "start"),
                              to_number<double>(parts[5], "end")}});
      } else {
        throw std::runtime_error(fmt::format("unknown section {}", section));
      }
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("{}/dataset.txt line {}: {}", dir, line_no, e.what()));
    }
  }
  ds.config = run.gen;
  ds.config.validate();
  if (ds.event_names.size() != ds.config.num_events || ds.rules.size() != ds.config.num_rules) {
    throw std::runtime_error(fmt::format("{}/dataset.txt: event or rule count disagrees with config",
                                         dir));
  }
  for (const auto& [split, name] : kSplits) {
    ds.split(split) = decode_split(read_file(fmt::format("{}/{}.bin", dir, name)), ds.config);
  }
  for (const auto& p : intervals) {
    auto& samples = ds.split(p.split);
    if (p.sample >= samples.size()) throw std::runtime_error("interval for a missing sample");
    samples[p.sample].timeline.add(p.object, p.event, p.iv);
  }
  return ds;
}

Bytes encode_sections(std::span<const Section> sections) {
  Bytes out;
  put_magic(out, kCheckpointMagic);
  put_u32(out, checked_u32(sections.size(), "section count"));
  for (const auto& s : sections) {
    put_u32(out, checked_u32(s.name.size(), "section name length"));
    out.insert(out.end(), s.name.begin(), s.name.end());
    put_u32(out, checked_u32(s.tensor.rank(), "rank"));
    for (std::size_t d : s.tensor.shape()) put_u32(out, checked_u32(d, "dimension"));
    for (double v : s.tensor.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<Section> decode_sections(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  in.magic(kCheckpointMagic, "checkpoint");
  const std::uint32_t count = in.u32();
  std::vector<Section> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    Section s;
    s.name = in.str(in.u32());
    diff::Shape shape(in.u32());
    std::size_t n = 1;
    for (auto& d : shape) {
      d = in.u32();
      n *= d;
    }
    in.need(8 * n);
    std::vector<double> data(n);
    for (double& v : data) v = std::bit_cast<double>(in.u64());
    s.tensor = diff::Tensor(std::move(shape), std::move(data));
    out.push_back(std::move(s));
  }
  if (!in.done()) throw std::runtime_error("checkpoint: trailing bytes");
  return out;
}

bool Checkpoint::operator==(const Checkpoint& o) const {
  if (method != o.method || stage != o.stage || !(params == o.params) || max_len != o.max_len ||
      delta != o.delta || presence != o.presence || heads.size() != o.heads.size() ||
      !(counts == o.counts) || !(constant_prediction == o.constant_prediction)) {
    return false;
  }
  for (std::size_t r = 0; r < heads.size(); ++r) {
    if (!(heads[r].candidates == o.heads[r].candidates) || heads[r].logits != o.heads[r].logits) {
      return false;
    }
  }
  return true;
}

Bytes encode_checkpoint(const Checkpoint& ckpt) {
  ckpt.params.check_shapes();
  const ModelConfig& mc = ckpt.params.config;
  std::vector<Section> s;
  s.push_back({"meta.method", scalar_tensor(static_cast<double>(ckpt.method))});
  s.push_back({"meta.stage", scalar_tensor(static_cast<double>(ckpt.stage))});
  // Axis order of the flattened relation vector: (u, v, kind).
  s.push_back({"layout.vec_mr_order", diff::Tensor({3}, {0.0, 1.0, 2.0})});
  auto hp = [&](const char* name, double v) {
    s.push_back({fmt::format("hparams.{}", name), scalar_tensor(v)});
  };
  hp("num_objects", static_cast<double>(mc.num_objects));
  hp("num_events", static_cast<double>(mc.num_events));
  hp("horizon", static_cast<double>(mc.horizon));
  hp("num_labels", static_cast<double>(mc.num_labels));
  hp("kernel_len", static_cast<double>(mc.kernel_len));
  hp("stride", static_cast<double>(mc.stride));
  hp("epsilon", mc.epsilon);
  hp("dropout", mc.dropout);
  hp("literal_indicator", mc.literal_indicator ? 1.0 : 0.0);
  hp("literal_end", mc.literal_end ? 1.0 : 0.0);
  hp("max_len", static_cast<double>(ckpt.max_len));
  hp("delta", ckpt.delta);
  hp("presence", ckpt.presence);
  s.push_back({"param.kernels", ckpt.params.kernels});
  s.push_back({"param.alpha", ckpt.params.alpha});
  s.push_back({"param.beta", ckpt.params.beta});
  s.push_back({"param.gamma", ckpt.params.gamma});
  s.push_back({"param.weights", ckpt.params.weights});
  for (std::size_t r = 0; r < ckpt.heads.size(); ++r) {
    const auto& h = ckpt.heads[r];
    s.push_back({fmt::format("head.{}.candidates", r), index_tensor(h.candidates.indices)});
    s.push_back({fmt::format("head.{}.logits", r),
                 diff::Tensor({h.logits.size()}, h.logits)});
  }
  if (ckpt.counts) {
    const auto& c = *ckpt.counts;
    std::vector<double> counts(c.counts.begin(), c.counts.end());
    s.push_back({"map.counts", diff::Tensor({c.dim, c.num_labels}, std::move(counts))});
  }
  if (ckpt.constant_prediction.size() > 0) {
    std::vector<double> bits(ckpt.constant_prediction.bits.begin(),
                             ckpt.constant_prediction.bits.end());
    const std::size_t n = bits.size();
    s.push_back({"map.prediction", diff::Tensor({n}, std::move(bits))});
  }
  return encode_sections(s);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  std::map<std::string, diff::Tensor> sections;
  for (auto& s : decode_sections(bytes)) sections[s.name] = std::move(s.tensor);
  auto get = [&](const std::string& name) -> const diff::Tensor& {
    const auto it = sections.find(name);
    if (it == sections.end()) {
      throw std::runtime_error(fmt::format("checkpoint: missing section '{}'", name));
    }
    return it->second;
  };
  auto size = [&](const std::string& name) {
    return static_cast<std::size_t>(get(name).item());
  };
  if (get("layout.vec_mr_order") != diff::Tensor({3}, {0.0, 1.0, 2.0})) {
    throw std::runtime_error("checkpoint: unsupported relation layout");
  }
  Checkpoint ckpt;
  ckpt.method = static_cast<Checkpoint::Method>(size("meta.method"));
  ckpt.stage = size("meta.stage");
  ModelConfig& mc = ckpt.params.config;
  mc.num_objects = size("hparams.num_objects");
  mc.num_events = size("hparams.num_events");
  mc.horizon = size("hparams.horizon");
  mc.num_labels = size("hparams.num_labels");
  mc.kernel_len = size("hparams.kernel_len");
  mc.stride = size("hparams.stride");
  mc.epsilon = get("hparams.epsilon").item();
  mc.dropout = get("hparams.dropout").item();
  mc.literal_indicator = get("hparams.literal_indicator").item() != 0.0;
  mc.literal_end = get("hparams.literal_end").item() != 0.0;
  ckpt.max_len = size("hparams.max_len");
  ckpt.delta = get("hparams.delta").item();
  ckpt.presence = get("hparams.presence").item();
  ckpt.params.kernels = get("param.kernels");
  ckpt.params.alpha = get("param.alpha");
  ckpt.params.beta = get("param.beta");
  ckpt.params.gamma = get("param.gamma");
  ckpt.params.weights = get("param.weights");
  ckpt.params.check_shapes();
  for (std::size_t r = 0; sections.count(fmt::format("head.{}.candidates", r)); ++r) {
    LabelHead h;
    h.candidates.label = r;
    for (double v : get(fmt::format("head.{}.candidates", r)).values()) {
      h.candidates.indices.push_back(static_cast<std::size_t>(v));
    }
    const auto logits = get(fmt::format("head.{}.logits", r)).values();
    h.logits.assign(logits.begin(), logits.end());
    h.space = CombinationSpace(h.candidates, ckpt.max_len, mc.num_events);
    if (h.space.size() != h.logits.size()) {
      throw std::runtime_error(fmt::format("checkpoint: head {} has {} logits for {} combinations",
                                           r, h.logits.size(), h.space.size()));
    }
    ckpt.heads.push_back(std::move(h));
  }
  if (sections.count("map.counts")) {
    const auto& t = get("map.counts");
    CountTable table;
    table.dim = t.shape().at(0);
    table.num_labels = t.shape().at(1);
    for (double v : t.values()) table.counts.push_back(static_cast<std::uint64_t>(v));
    table.normalize();
    ckpt.counts = std::move(table);
  }
  if (sections.count("map.prediction")) {
    const auto bits = get("map.prediction").values();
    ckpt.constant_prediction = LabelVector(bits.size());
    for (std::size_t r = 0; r < bits.size(); ++r) ckpt.constant_prediction.set(r, bits[r] != 0.0);
  }
  return ckpt;
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  write_file(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file(path));
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

void write_text(const std::string& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::string& path) {
  const Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

}  // namespace ntlp
