// Copyright 2026 The regionptr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "regionptr/config.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "regionptr/error.h"

namespace regionptr {
namespace {

std::string_view trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::size_t parse_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw DataError("config key '" + std::string(key) +
                    "' expects a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw DataError("config key '" + std::string(key) + "' expects a number, got '" +
                    s + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw DataError("config key '" + std::string(key) + "' expects a boolean, got '" +
                  std::string(v) + "'");
}

std::string resolve(std::string_view v, const std::string& base_dir) {
  if (v.empty() || base_dir.empty()) return std::string(v);
  std::filesystem::path p{std::string(v)};
  if (p.is_absolute()) return p.string();
  return (std::filesystem::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

ModelConfig RunConfig::model_config(std::size_t vocab_size) const {
  ModelConfig m;
  m.embed_dim = embed_dim;
  m.hidden_dim = hidden_dim;
  m.appearance_dim = appearance_dim;
  m.vocab_size = vocab_size;
  m.dropout = dropout;
  return m;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view value,
                      const std::string& base_dir) {
  using Setter = std::function<void(std::string_view)>;
  auto path = [&](std::string& field) {
    return Setter([&field, &base_dir](std::string_view v) { field = resolve(v, base_dir); });
  };
  auto size = [&](std::size_t& field) {
    return Setter([&field, key](std::string_view v) { field = parse_size(key, v); });
  };
  auto real = [&](double& field) {
    return Setter([&field, key](std::string_view v) { field = parse_double(key, v); });
  };
  auto flag = [&](bool& field) {
    return Setter([&field, key](std::string_view v) { field = parse_bool(key, v); });
  };
  auto word = [&](std::string& field) {
    return Setter([&field](std::string_view v) { field = std::string(v); });
  };

  const std::map<std::string_view, Setter> setters = {
      {"corpus", path(c.corpus)},
      {"regions", path(c.regions)},
      {"features", path(c.features)},
      {"tagged", path(c.tagged)},
      {"bundle", path(c.bundle)},
      {"checkpoint_dir", path(c.checkpoint_dir)},
      {"candidates", path(c.candidates)},
      {"report", path(c.report)},
      {"trace", path(c.trace)},
      {"min_count", size(c.min_count)},
      {"vocab_cap", size(c.vocab_cap)},
      {"embed_dim", size(c.embed_dim)},
      {"hidden_dim", size(c.hidden_dim)},
      {"appearance_dim", size(c.appearance_dim)},
      {"dropout", real(c.dropout)},
      {"optimizer", word(c.optimizer)},
      {"learning_rate", real(c.learning_rate)},
      {"batch_size", size(c.batch_size)},
      {"epochs", size(c.epochs)},
      {"validation_period", size(c.validation_period)},
      {"early_stop_patience", size(c.early_stop_patience)},
      {"seed", [&c, key](std::string_view v) { c.seed = parse_size(key, v); }},
      {"ablation", flag(c.ablation)},
      {"teacher_guided", flag(c.teacher_guided)},
      {"max_len", size(c.max_len)},
      {"workers", size(c.workers)},
      {"eval_split", word(c.eval_split)},
      {"synth_seed", [&c, key](std::string_view v) { c.synth.seed = parse_size(key, v); }},
      {"synth_train_images", size(c.synth.train_images)},
      {"synth_val_images", size(c.synth.val_images)},
      {"synth_test_images", size(c.synth.test_images)},
      {"synth_regions_min", size(c.synth.regions_min)},
      {"synth_regions_max", size(c.synth.regions_max)},
      {"synth_captions_per_image", size(c.synth.captions_per_image)},
      {"synth_nouns_per_class", size(c.synth.nouns_per_class)},
      {"synth_noise", real(c.synth.noise)},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw DataError("unknown config key '" + std::string(key) + "'");
  it->second(value);
}

RunConfig parse_config(std::string_view text, const std::string& base_dir) {
  RunConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw DataError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), base_dir);
    } catch (const DataError& e) {
      throw DataError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path().string();
  return parse_config(buffer.str(), dir);
}

}  // namespace regionptr
