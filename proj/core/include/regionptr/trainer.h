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
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regionptr/dataset.h"
#include "regionptr/model.h"

namespace regionptr {

struct TrainerOptions {
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  std::size_t validation_period = 10;
  std::size_t early_stop_patience = 0;  // validations without improvement; 0 = off
  std::string optimizer = "adam";
  double learning_rate = 1e-5;
  std::uint64_t seed = 1;
  bool ablation = false;
  bool dropout = true;
  std::size_t max_len = 30;
  std::size_t workers = 1;
  std::string checkpoint_dir;  // empty: keep nothing on disk

  void validate() const;
};

// Keeps the checkpoint whose score is strictly higher than every earlier
// one; ties keep the earlier checkpoint.
class CheckpointSelector {
 public:
  // `path` receives the best checkpoint; empty keeps it in memory only.
  explicit CheckpointSelector(std::string path = "") : path_(std::move(path)) {}

  // Returns true and stores the checkpoint when `score` is a new best.
  bool offer(double score, std::size_t epoch,
             const std::function<nn::Checkpoint()>& make_checkpoint);

  std::optional<double> best_score() const { return best_score_; }
  std::size_t best_epoch() const { return best_epoch_; }
  const std::optional<nn::Checkpoint>& best() const { return best_; }

 private:
  std::string path_;
  std::optional<double> best_score_;
  std::size_t best_epoch_ = 0;
  std::optional<nn::Checkpoint> best_;
};

// Validation inputs and references for greedy generation + CIDEr-D.
struct ValidationSet {
  std::vector<ExampleInputs> inputs;
  std::vector<std::vector<Sentence>> references;
  const Vocabulary* vocab = nullptr;

  bool empty() const { return inputs.empty(); }
};

ValidationSet validation_set(const CorpusBundle& bundle, std::string_view split,
                             const FeatureStore& store);

// CIDEr-D of greedy captions over the validation set.
double validation_cider(const Captioner& model, const ValidationSet& validation,
                        const GenerateOptions& options, std::size_t workers = 1);

struct TrainResult {
  std::vector<double> epoch_losses;
  std::optional<double> best_cider;
  std::size_t best_epoch = 0;
  bool early_stopped = false;
};

// Mini-batch training with a seeded per-epoch shuffle. Every
// validation_period epochs the model is scored on `validation` and the
// best-scoring checkpoint is written to <checkpoint_dir>/best.ckpt;
// <checkpoint_dir>/last.ckpt follows every validation and the end of
// training. Without a validation set the final model is kept as best.
//
// Log lines: "epoch <e> loss <l>", "validate epoch <e> cider <c>[ best]".
// A non-finite loss logs "abort epoch <e>: ..." and rethrows the
// NumericError; checkpoints already on disk are left untouched.
TrainResult train(Captioner& model, std::span<const TrainingExample> examples,
                  const ValidationSet& validation, const TrainerOptions& options,
                  std::ostream& log);

}  // namespace regionptr
