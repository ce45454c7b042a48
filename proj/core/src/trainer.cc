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

#include "regionptr/trainer.h"

#include <cstdio>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <thread>

#include "regionptr/error.h"
#include "regionptr/random.h"

namespace regionptr {
namespace {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return buf;
}

nn::Checkpoint tagged_checkpoint(const Captioner& model, const nn::Optimizer& optimizer,
                                 std::size_t epoch, std::optional<double> cider) {
  nn::Checkpoint c = model.to_checkpoint(&optimizer);
  c.header["epoch"] = std::to_string(epoch);
  c.header["cider"] = cider ? format_number(*cider) : "none";
  return c;
}

}  // namespace

void TrainerOptions::validate() const {
  if (epochs == 0) throw InvalidArgument("epochs must be positive");
  if (batch_size == 0) throw InvalidArgument("batch_size must be positive");
  if (validation_period == 0) throw InvalidArgument("validation_period must be at least 1");
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (max_len == 0) throw InvalidArgument("max_len must be positive");
}

bool CheckpointSelector::offer(double score, std::size_t epoch,
                               const std::function<nn::Checkpoint()>& make_checkpoint) {
  if (best_score_ && !(score > *best_score_)) return false;
  best_ = make_checkpoint();
  if (!path_.empty()) best_->save(path_);
  best_score_ = score;
  best_epoch_ = epoch;
  return true;
}

ValidationSet validation_set(const CorpusBundle& bundle, std::string_view split,
                             const FeatureStore& store) {
  ValidationSet v;
  v.vocab = &bundle.vocab;
  for (const BundleExample* ex : bundle.split(split)) {
    v.inputs.push_back(example_inputs(bundle, *ex, store));
    std::vector<Sentence> refs;
    for (const auto& c : ex->captions) refs.push_back(c.words);
    v.references.push_back(std::move(refs));
  }
  return v;
}

double validation_cider(const Captioner& model, const ValidationSet& validation,
                        const GenerateOptions& options, std::size_t workers) {
  const std::size_t n = validation.inputs.size();
  std::vector<EvalExample> corpus(n);
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      const auto& in = validation.inputs[i];
      const Generation g = generate(model, in.full_image, in.regions, options);
      corpus[i].candidate = validation.vocab->decode_words(g.words());
      corpus[i].references = validation.references[i];
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(run, w, workers);
    for (auto& t : threads) t.join();
  }
  return cider_d(corpus);
}

TrainResult train(Captioner& model, std::span<const TrainingExample> examples,
                  const ValidationSet& validation, const TrainerOptions& options,
                  std::ostream& log) {
  options.validate();
  if (examples.empty()) throw DataError("no training sequences");
  for (const auto& ex : examples) validate_example(ex, model.config());

  std::string best_path;
  std::string last_path;
  if (!options.checkpoint_dir.empty()) {
    std::filesystem::create_directories(options.checkpoint_dir);
    best_path = (std::filesystem::path(options.checkpoint_dir) / "best.ckpt").string();
    last_path = (std::filesystem::path(options.checkpoint_dir) / "last.ckpt").string();
  }

  auto optimizer = nn::make_optimizer(options.optimizer, options.learning_rate);
  CheckpointSelector selector(best_path);
  TrainOptions step_options{options.ablation, options.dropout};
  GenerateOptions gen_options;
  gen_options.max_len = options.max_len;
  gen_options.ablation = options.ablation;

  const std::uint64_t shuffle_seed = derive_seed(options.seed, "shuffle");
  const std::uint64_t dropout_seed = derive_seed(options.seed, "dropout");

  std::vector<std::size_t> order(examples.size());
  std::vector<TrainingExample> batch;
  TrainResult result;
  std::size_t stale = 0;

  if (validation.empty()) log << "no validation split; keeping the final epoch\n";

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(shuffle_seed, epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

    double total = 0.0;
    try {
      for (std::size_t start = 0, b = 0; start < order.size();
           start += options.batch_size, ++b) {
        const std::size_t end = std::min(order.size(), start + options.batch_size);
        batch.clear();
        for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
        const double loss = train_step(model, batch, optimizer.get(), step_options,
                                       derive_seed(dropout_seed, epoch, b));
        total += loss * static_cast<double>(batch.size());
      }
    } catch (const NumericError& e) {
      log << "abort epoch " << epoch << ": " << e.what() << '\n';
      log.flush();
      throw;
    }
    const double epoch_loss = total / static_cast<double>(examples.size());
    result.epoch_losses.push_back(epoch_loss);
    log << "epoch " << epoch << " loss " << format_number(epoch_loss) << '\n';

    const bool last_epoch = epoch == options.epochs;
    if (!validation.empty() && epoch % options.validation_period == 0) {
      const double cider = validation_cider(model, validation, gen_options, options.workers);
      const bool improved = selector.offer(cider, epoch, [&] {
        return tagged_checkpoint(model, *optimizer, epoch, cider);
      });
      log << "validate epoch " << epoch << " cider " << format_number(cider)
          << (improved ? " best" : "") << '\n';
      if (!last_path.empty()) tagged_checkpoint(model, *optimizer, epoch, cider).save(last_path);
      stale = improved ? 0 : stale + 1;
      if (options.early_stop_patience > 0 && stale >= options.early_stop_patience &&
          !last_epoch) {
        log << "early stop at epoch " << epoch << '\n';
        result.early_stopped = true;
        break;
      }
    }
    if (last_epoch) {
      if (!last_path.empty()) {
        tagged_checkpoint(model, *optimizer, epoch, std::nullopt).save(last_path);
      }
      if (validation.empty() && !best_path.empty()) {
        tagged_checkpoint(model, *optimizer, epoch, std::nullopt).save(best_path);
      }
    }
  }
  if (selector.best_score()) {
    result.best_cider = selector.best_score();
    result.best_epoch = selector.best_epoch();
    log << "best epoch " << result.best_epoch << " cider " << format_number(*result.best_cider)
        << '\n';
  } else {
    result.best_epoch = result.epoch_losses.size();
  }
  return result;
}

}  // namespace regionptr
