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

#include "ntlp/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <type_traits>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ntlp/structure.hpp"

namespace ntlp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, std::string_view key) {
  text = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw std::invalid_argument(fmt::format("config: bad value '{}' for {}", text, key));
  }
  return value;
}

bool parse_bool(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw std::invalid_argument(fmt::format("config: bad boolean '{}' for {}", text, key));
}

template <typename T>
std::vector<T> parse_list(std::string_view text, std::string_view key) {
  std::vector<T> out;
  text = trim(text);
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_number<T>(text.substr(0, comma), key));
    if (comma == std::string_view::npos) break;
    text = text.substr(comma + 1);
  }
  if (out.empty()) throw std::invalid_argument(fmt::format("config: empty list for {}", key));
  return out;
}

struct Entry {
  std::string_view key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Builders for members reached through a nested struct.
template <typename Member>
Entry field(std::string_view key, Member accessor) {
  using T = std::remove_cvref_t<decltype(accessor(std::declval<RunConfig&>()))>;
  Entry e{key, {}, {}};
  e.set = [key, accessor](RunConfig& c, std::string_view v) {
    auto& slot = accessor(c);
    if constexpr (std::is_same_v<T, bool>) {
      slot = parse_bool(v, key);
    } else if constexpr (std::is_same_v<T, std::string>) {
      slot = std::string(trim(v));
    } else if constexpr (std::is_same_v<T, std::vector<double>> ||
                         std::is_same_v<T, std::vector<std::size_t>>) {
      slot = parse_list<typename T::value_type>(v, key);
    } else {
      slot = parse_number<T>(v, key);
    }
  };
  e.get = [accessor](const RunConfig& c) {
    auto& slot = accessor(const_cast<RunConfig&>(c));
    if constexpr (std::is_same_v<T, bool>) {
      return std::string(slot ? "true" : "false");
    } else if constexpr (std::is_same_v<T, std::string>) {
      return slot;
    } else if constexpr (std::is_same_v<T, std::vector<double>> ||
                         std::is_same_v<T, std::vector<std::size_t>>) {
      return fmt::format("{}", fmt::join(slot, ","));
    } else {
      return fmt::format("{}", slot);
    }
  };
  return e;
}

#define NTLP_FIELD(name, path) field(name, [](RunConfig& c) -> auto& { return c.path; })

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      NTLP_FIELD("seed", gen.seed),
      NTLP_FIELD("num_rules", gen.num_rules),
      NTLP_FIELD("max_rule_len", gen.max_rule_len),
      NTLP_FIELD("num_events", gen.num_events),
      NTLP_FIELD("num_objects", gen.num_objects),
      NTLP_FIELD("horizon", gen.horizon),
      NTLP_FIELD("rules_per_sample", gen.rules_per_sample),
      NTLP_FIELD("detection_means", gen.detection_means),
      NTLP_FIELD("detection_std", gen.detection_std),
      NTLP_FIELD("noise_std", gen.noise_std),
      NTLP_FIELD("interval_len_min", gen.interval_len_min),
      NTLP_FIELD("interval_len_max", gen.interval_len_max),
      NTLP_FIELD("train_count", gen.train_count),
      NTLP_FIELD("val_count", gen.val_count),
      NTLP_FIELD("test_count", gen.test_count),
      NTLP_FIELD("lr", train.lr),
      NTLP_FIELD("adam_beta1", train.beta1),
      NTLP_FIELD("adam_beta2", train.beta2),
      NTLP_FIELD("adam_eps", train.adam_eps),
      NTLP_FIELD("batch_param", train.batch_param),
      NTLP_FIELD("batch_struct", train.batch_struct),
      NTLP_FIELD("epochs_param", train.epochs_param),
      NTLP_FIELD("epochs_struct", train.epochs_struct),
      NTLP_FIELD("l1", train.l1),
      NTLP_FIELD("delta", train.delta),
      NTLP_FIELD("struct_dropout", train.struct_dropout),
      NTLP_FIELD("threads", train.threads),
      NTLP_FIELD("kernel_len", model.kernel_len),
      NTLP_FIELD("stride", model.stride),
      NTLP_FIELD("epsilon", model.epsilon),
      NTLP_FIELD("dropout", model.dropout),
      NTLP_FIELD("literal_indicator", model.literal_indicator),
      NTLP_FIELD("literal_end", model.literal_end),
      NTLP_FIELD("candidates", candidates),
      NTLP_FIELD("n_max", n_max),
      NTLP_FIELD("presence", presence),
      NTLP_FIELD("top_k", top_k),
      NTLP_FIELD("rank_depth", rank_depth),
      NTLP_FIELD("strict_rules", strict_rules),
      NTLP_FIELD("distinct_rules", distinct_rules),
      NTLP_FIELD("dataset", dataset),
      NTLP_FIELD("checkpoint", checkpoint),
      NTLP_FIELD("out", out),
      NTLP_FIELD("stage", stage),
  };
  return table;
}

#undef NTLP_FIELD

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key == key) return e;
  }
  throw std::invalid_argument(fmt::format("config: unknown key '{}'", key));
}

}  // namespace

std::size_t RunConfig::candidates_for(std::size_t n) const {
  if (n == 0) throw std::invalid_argument("candidates_for: n must be >= 1");
  if (candidates.empty()) return default_candidate_count(n);
  return n <= candidates.size() ? candidates[n - 1] : candidates.back();
}

void RunConfig::validate() const {
  gen.validate();
  train.validate();
  if (candidates.empty()) throw std::invalid_argument("config: candidates must not be empty");
  for (std::size_t c : candidates) {
    if (c == 0) throw std::invalid_argument("config: candidate counts must be >= 1");
  }
  if (top_k == 0 || rank_depth == 0) {
    throw std::invalid_argument("config: top_k and rank_depth must be >= 1");
  }
  if (stage != "full" && stage != "map") {
    throw std::invalid_argument(fmt::format("config: unknown stage '{}' (full, map)", stage));
  }
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& e : entries()) keys.emplace_back(e.key);
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  find_entry(key).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) {
  return find_entry(key).get(cfg);
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::invalid_argument(fmt::format("config line {}: expected key = value", line_no));
    }
    try {
      set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(fmt::format("config line {}: {}", line_no, e.what()));
    }
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument(fmt::format("cannot open config '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string to_text(const RunConfig& cfg) {
  std::string out;
  for (const auto& e : entries()) out += fmt::format("{} = {}\n", e.key, e.get(cfg));
  return out;
}

}  // namespace ntlp
