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

#pragma once

#include <cstdint>
#include <string>

#include "regionptr/model.h"
#include "regionptr/synth.h"

namespace regionptr {

// Run configuration read from a flat "key = value" file. Lines starting
// with '#' are comments. Relative paths resolve against the directory of
// the config file. Unknown keys are rejected.
struct RunConfig {
  // Paths.
  std::string corpus = "corpus.tsv";
  std::string regions = "regions.tsv";
  std::string features = "features.bin";
  std::string tagged = "tagged.txt";
  std::string bundle = "bundle.bin";
  std::string checkpoint_dir = "checkpoints";
  std::string candidates = "candidates.tsv";
  std::string report = "report.txt";
  std::string trace = "";

  // Preprocessing.
  std::size_t min_count = 5;
  std::size_t vocab_cap = 0;

  // Model.
  std::size_t embed_dim = 1024;
  std::size_t hidden_dim = 1024;
  std::size_t appearance_dim = 2048;
  double dropout = 0.7;

  // Training.
  std::string optimizer = "adam";
  double learning_rate = 1e-5;
  std::size_t batch_size = 100;
  std::size_t epochs = 100;
  std::size_t validation_period = 10;
  std::size_t early_stop_patience = 0;  // validations without improvement; 0 = off
  std::uint64_t seed = 1;

  // Decoding and evaluation.
  bool ablation = false;
  bool teacher_guided = false;
  std::size_t max_len = 30;
  std::size_t workers = 1;
  std::string eval_split = "test";

  SyntheticSpec synth;

  ModelConfig model_config(std::size_t vocab_size) const;
};

// Parses config text. `base_dir` is prefixed to relative paths.
RunConfig parse_config(std::string_view text, const std::string& base_dir = "");
RunConfig load_config(const std::string& path);

// Applies one "key=value" override with the same rules as the file.
void set_config_value(RunConfig& config, std::string_view key,
                      std::string_view value, const std::string& base_dir = "");

}  // namespace regionptr
