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

// regionptr command line: ingest, synth, train, generate, eval, gradcheck,
// stats. Exit codes: 0 ok, 1 usage, 2 data error, 3 numeric failure.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.h"
#include "regionptr/error.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;
  bool ablation = false;
  bool teacher_guided = false;
  std::optional<std::size_t> workers;
};

regionptr::RunConfig resolve_config(const Flags& flags, bool synth) {
  regionptr::RunConfig config = regionptr::load_config(flags.config);
  if (flags.seed) {
    config.seed = *flags.seed;
    if (synth) config.synth.seed = *flags.seed;
  }
  if (flags.ablation) config.ablation = true;
  if (flags.teacher_guided) config.teacher_guided = true;
  if (flags.workers) config.workers = *flags.workers;
  if (config.workers == 0) throw regionptr::InvalidArgument("--workers must be positive");
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regionptr: region-sequence controlled captioning"};
  app.require_subcommand(1);

  Flags flags;
  std::vector<std::string> candidate_files;
  regionptr::cli::StatsOptions stats_options;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config, "Run configuration file")->required();
    cmd->add_option("--seed", flags.seed, "Override the configured seed");
  };

  auto* ingest = app.add_subcommand("ingest", "Preprocess raw corpus files into a bundle");
  add_common(ingest);
  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus");
  add_common(synth);
  auto* train = app.add_subcommand("train", "Train with validation-based selection");
  add_common(train);
  train->add_flag("--ablation", flags.ablation, "Feed pooled regions instead of the sequence");
  train->add_option("--workers", flags.workers, "Threads for validation generation");
  auto* generate = app.add_subcommand("generate", "Greedy captions for the eval split");
  add_common(generate);
  generate->add_option("--checkpoint", flags.checkpoint, "Checkpoint (default best.ckpt)");
  generate->add_flag("--ablation", flags.ablation, "Feed pooled regions");
  generate->add_option("--workers", flags.workers, "Generation threads");
  auto* eval = app.add_subcommand("eval", "Score candidate files");
  add_common(eval);
  eval->add_option("candidates", candidate_files, "Candidate files (default from config)");
  eval->add_option("--checkpoint", flags.checkpoint, "Checkpoint for --teacher-guided");
  eval->add_flag("--teacher-guided", flags.teacher_guided, "Add NEXT agreement");
  eval->add_flag("--ablation", flags.ablation, "Pooled regions for --teacher-guided");
  eval->add_option("--workers", flags.workers, "Unused; accepted for symmetry");
  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  add_common(gradcheck);
  gradcheck->add_flag("--ablation", flags.ablation, "Check the ablation input path");
  auto* stats = app.add_subcommand("stats", "Corpus, diversity and PoS statistics");
  add_common(stats);
  stats->add_option("--tagged", stats_options.tagged, "Pre-tagged corpus");
  stats->add_option("--export-chunks", stats_options.export_chunks,
                    "Write chunked training captions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const regionptr::RunConfig config = resolve_config(flags, synth->parsed());
    if (ingest->parsed()) {
      regionptr::cli::cmd_ingest(config, std::cout);
    } else if (synth->parsed()) {
      regionptr::cli::cmd_synth(config, std::cout);
    } else if (train->parsed()) {
      regionptr::cli::cmd_train(config, std::cout);
    } else if (generate->parsed()) {
      regionptr::cli::cmd_generate(config, flags.checkpoint, std::cout);
    } else if (eval->parsed()) {
      regionptr::cli::cmd_eval(config, candidate_files, flags.checkpoint, std::cout);
    } else if (gradcheck->parsed()) {
      const auto summary = regionptr::cli::cmd_gradcheck(config, std::cout);
      if (!(summary.max_relative_error < 1e-4)) {
        std::cerr << "gradcheck: relative error above 1e-4\n";
        return kExitNumeric;
      }
    } else if (stats->parsed()) {
      regionptr::cli::cmd_stats(config, stats_options, std::cout);
    }
  } catch (const regionptr::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const regionptr::InvalidArgument& e) {
    std::cerr << "usage: " << e.what() << '\n';
    return kExitUsage;
  } catch (const regionptr::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
