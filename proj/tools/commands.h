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

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "regionptr/config.h"
#include "regionptr/metrics.h"
#include "regionptr/nn/gradcheck.h"
#include "regionptr/trainer.h"

namespace regionptr::cli {

// Writes the synthetic corpus, region table, feature store and tagged
// corpus named in `config`.
void cmd_synth(const RunConfig& config, std::ostream& out);

// Raw corpus + region table -> bundle. Prints split sizes.
CorpusBundle cmd_ingest(const RunConfig& config, std::ostream& out);

// Trains from the bundle and feature store. The log goes to `log` and to
// <checkpoint_dir>/train.log.
TrainResult cmd_train(const RunConfig& config, std::ostream& log);

// Greedy generation on config.eval_split with the given checkpoint
// (default <checkpoint_dir>/best.ckpt). Writes config.candidates and, when
// config.trace is set, the trace dump.
void cmd_generate(const RunConfig& config, const std::string& checkpoint,
                  std::ostream& out);

// Scores one or more candidate files (several runs give mean +/- 95%
// intervals). With config.teacher_guided, NEXT agreement of the checkpoint
// on config.eval_split is added. The report is printed and written to
// config.report.
std::vector<EvalReport> cmd_eval(const RunConfig& config,
                                 const std::vector<std::string>& candidate_files,
                                 const std::string& checkpoint, std::ostream& out);

struct GradCheckSummary {
  std::vector<nn::GradCheckResult> arrays;
  double max_relative_error = 0;
};

// Central-difference check of train_step on a random batch for a freshly
// initialized model with the config's dims; V is the reserved tokens plus
// vocab_cap words.
GradCheckSummary cmd_gradcheck(const RunConfig& config, std::ostream& out);

struct StatsOptions {
  std::string tagged;          // overrides config.tagged
  std::string export_chunks;   // writes chunked train captions when set
};

// Ground-truth diversity row for config.eval_split, chunk statistics and
// PoS end-of-chunk PPV from the tagged corpus when it exists.
void cmd_stats(const RunConfig& config, const StatsOptions& options, std::ostream& out);

}  // namespace regionptr::cli
