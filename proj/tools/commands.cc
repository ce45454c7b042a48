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

#include "commands.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "regionptr/bundle.h"
#include "regionptr/dataset.h"
#include "regionptr/error.h"
#include "regionptr/random.h"
#include "regionptr/synth.h"
#include "regionptr/text.h"

namespace regionptr::cli {
namespace {

// Copies everything written to it into two streams.
class TeeBuffer : public std::streambuf {
 public:
  TeeBuffer(std::streambuf* a, std::streambuf* b) : a_(a), b_(b) {}

 protected:
  int overflow(int c) override {
    if (c == traits_type::eof()) return traits_type::not_eof(c);
    const auto ch = traits_type::to_char_type(c);
    if (a_->sputc(ch) == traits_type::eof() || b_->sputc(ch) == traits_type::eof()) {
      return traits_type::eof();
    }
    return c;
  }
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    a_->sputn(s, n);
    b_->sputn(s, n);
    return n;
  }
  int sync() override { return (a_->pubsync() == 0 && b_->pubsync() == 0) ? 0 : -1; }

 private:
  std::streambuf* a_;
  std::streambuf* b_;
};

// Gradients around 1e-9 are common at initialization. A two-point stencil
// with a small step loses them to cancellation in the loss, so the check
// uses the fourth-order stencil with a wider step.
constexpr double kCaptionerStep = 1e-2;

FeatureStore load_features(const RunConfig& config) {
  return FeatureStore::load(config.features, config.appearance_dim);
}

std::string checkpoint_path(const RunConfig& config, const std::string& checkpoint) {
  if (!checkpoint.empty()) return checkpoint;
  return (std::filesystem::path(config.checkpoint_dir) / "best.ckpt").string();
}

Captioner load_model(const RunConfig& config, const std::string& checkpoint,
                     const CorpusBundle& bundle) {
  const Captioner model = Captioner::from_checkpoint(nn::Checkpoint::load(checkpoint));
  if (model.config().vocab_size != bundle.vocab.size()) {
    throw DataError("checkpoint vocabulary size " + std::to_string(model.config().vocab_size) +
                    " does not match the bundle (" + std::to_string(bundle.vocab.size()) + ")");
  }
  if (model.config().appearance_dim != config.appearance_dim) {
    throw DataError("checkpoint appearance_dim " +
                    std::to_string(model.config().appearance_dim) +
                    " does not match the config (" + std::to_string(config.appearance_dim) +
                    ")");
  }
  return model;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

void cmd_synth(const RunConfig& config, std::ostream& out) {
  const SyntheticData data = synthesize(config.synth, config.appearance_dim);
  write_synthetic(data, {config.corpus, config.regions, config.features, config.tagged});
  out << "synth captions " << data.corpus.size() << " entities " << data.regions.size()
      << " feature_dim " << config.appearance_dim << '\n';
}

CorpusBundle cmd_ingest(const RunConfig& config, std::ostream& out) {
  const auto records = read_corpus_file(config.corpus);
  RegionTable regions = RegionTable::load(config.regions);
  const CorpusBundle bundle =
      build_bundle(records, std::move(regions), {config.min_count, config.vocab_cap});
  bundle.save(config.bundle);
  out << "vocabulary " << bundle.vocab.size() << '\n';
  for (const char* split : {"train", "val", "test"}) {
    std::size_t captions = 0;
    for (const auto* ex : bundle.split(split)) captions += ex->captions.size();
    out << "split " << split << " examples " << bundle.split_size(split) << " captions "
        << captions << '\n';
  }
  return bundle;
}

TrainResult cmd_train(const RunConfig& config, std::ostream& log) {
  const CorpusBundle bundle = CorpusBundle::load(config.bundle);
  const FeatureStore store = load_features(config);
  const auto examples = training_examples(bundle, "train", store);
  const ValidationSet validation = validation_set(bundle, "val", store);

  const ModelConfig model_config = config.model_config(bundle.vocab.size());
  model_config.validate();
  Captioner model(model_config, derive_seed(config.seed, "init"));

  TrainerOptions options;
  options.epochs = config.epochs;
  options.batch_size = config.batch_size;
  options.validation_period = config.validation_period;
  options.early_stop_patience = config.early_stop_patience;
  options.optimizer = config.optimizer;
  options.learning_rate = config.learning_rate;
  options.seed = config.seed;
  options.ablation = config.ablation;
  options.dropout = config.dropout > 0.0;
  options.max_len = config.max_len;
  options.workers = config.workers;
  options.checkpoint_dir = config.checkpoint_dir;

  std::filesystem::create_directories(config.checkpoint_dir);
  const auto log_path = std::filesystem::path(config.checkpoint_dir) / "train.log";
  std::ofstream file(log_path, std::ios::trunc);
  if (!file) throw DataError("cannot write " + log_path.string());
  TeeBuffer tee(log.rdbuf(), file.rdbuf());
  std::ostream both(&tee);
  both << "train sequences " << examples.size() << " validation examples "
       << validation.inputs.size() << " parameters " << model.parameters().scalar_count()
       << '\n';
  TrainResult result = train(model, examples, validation, options, both);
  both.flush();
  return result;
}

void cmd_generate(const RunConfig& config, const std::string& checkpoint, std::ostream& out) {
  const CorpusBundle bundle = CorpusBundle::load(config.bundle);
  const FeatureStore store = load_features(config);
  const Captioner model = load_model(config, checkpoint_path(config, checkpoint), bundle);

  GenerateOptions options;
  options.max_len = config.max_len;
  options.ablation = config.ablation;
  const auto generations =
      generate_split(model, bundle, config.eval_split, store, options, config.workers);
  const bool with_trace = !config.trace.empty();
  const auto records = candidate_records(bundle, config.eval_split, generations, with_trace);

  std::ofstream file(config.candidates, std::ios::trunc);
  if (!file) throw DataError("cannot write " + config.candidates);
  write_candidates(file, records);
  if (with_trace) {
    std::ofstream trace(config.trace, std::ios::trunc);
    if (!trace) throw DataError("cannot write " + config.trace);
    write_generation_traces(trace, bundle, config.eval_split, generations);
  }
  std::size_t forced = 0;
  for (const auto& g : generations) forced += g.natural_end ? 0 : 1;
  out << "generated " << records.size() << " captions for split " << config.eval_split
      << " (" << forced << " hit max_len)\n";
}

std::vector<EvalReport> cmd_eval(const RunConfig& config,
                                 const std::vector<std::string>& candidate_files,
                                 const std::string& checkpoint, std::ostream& out) {
  const CorpusBundle bundle = CorpusBundle::load(config.bundle);
  const auto training = bundle.training_captions();
  std::vector<std::string> files = candidate_files;
  if (files.empty()) files.push_back(config.candidates);

  std::optional<NextAgreement> next;
  if (config.teacher_guided) {
    const FeatureStore store = load_features(config);
    const Captioner model = load_model(config, checkpoint_path(config, checkpoint), bundle);
    const auto examples = training_examples(bundle, config.eval_split, store);
    next = next_agreement(model, examples, config.ablation);
  }

  std::vector<EvalReport> reports;
  for (const auto& path : files) {
    const auto candidates = read_candidates(path);
    const auto corpus = eval_examples(bundle, config.eval_split, candidates);
    EvalReport report = evaluate(corpus, training);
    report.next = next;
    reports.push_back(std::move(report));
  }

  std::ostringstream text;
  if (reports.size() == 1) {
    write_report(text, reports.front(), files.front());
  } else {
    write_multi_run_report(text, reports, std::to_string(reports.size()) + " runs");
  }
  out << text.str();
  if (!config.report.empty()) {
    std::ofstream file(config.report, std::ios::trunc);
    if (!file) throw DataError("cannot write " + config.report);
    file << text.str();
  }
  return reports;
}

GradCheckSummary cmd_gradcheck(const RunConfig& config, std::ostream& out) {
  if (config.vocab_cap == 0) throw InvalidArgument("gradcheck needs vocab_cap > 0");
  ModelConfig mc = config.model_config(token::kFirstWordId + config.vocab_cap);
  mc.dropout = 0.0;
  mc.validate();
  Captioner model(mc, derive_seed(config.seed, "init"));

  // Random batch: 0..3 regions per sequence, words between the NEXTs.
  Rng rng(derive_seed(config.seed, "gradcheck"));
  auto random_region = [&] {
    Eigen::VectorXd v(static_cast<Eigen::Index>(mc.region_dim()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
    return RegionFeatureVector(v);
  };
  std::vector<TrainingExample> batch;
  for (std::size_t k = 0; k < 3; ++k) {
    TrainingExample ex{{token::kBos}, {}, random_region()};
    const std::size_t regions = k + 1;
    for (std::size_t r = 0; r < regions; ++r) {
      const std::size_t words = 1 + rng.below(3);
      for (std::size_t w = 0; w < words; ++w) {
        ex.tokens.push_back(static_cast<TokenId>(
            token::kFirstWordId + rng.below(mc.vocab_size - token::kFirstWordId)));
      }
      ex.tokens.push_back(token::kNext);
      ex.regions.push_back(random_region());
    }
    ex.tokens.push_back(static_cast<TokenId>(
        token::kFirstWordId + rng.below(mc.vocab_size - token::kFirstWordId)));
    ex.tokens.push_back(token::kEos);
    batch.push_back(std::move(ex));
  }

  const TrainOptions options{config.ablation, false};
  auto loss = [&] { return train_step(model, batch, nullptr, options, config.seed); };
  loss();
  GradCheckSummary summary;
  summary.arrays = nn::finite_difference_check(loss, model.parameters(), kCaptionerStep, 200,
                                               derive_seed(config.seed, "coords"),
                                               nn::Stencil::kFourPoint);

  out << "E=" << mc.embed_dim << " H=" << mc.hidden_dim << " D=" << mc.appearance_dim
      << " V=" << mc.vocab_size << '\n';
  out << std::left << std::setw(20) << "parameter" << std::setw(8) << "coords"
      << std::setw(14) << "max_rel" << "max_abs\n";
  for (const auto& r : summary.arrays) {
    summary.max_relative_error = std::max(summary.max_relative_error, r.max_relative_error);
    std::ostringstream rel, abs;
    rel << std::scientific << std::setprecision(3) << r.max_relative_error;
    abs << std::scientific << std::setprecision(3) << r.max_absolute_error;
    out << std::left << std::setw(20) << r.name << std::setw(8) << r.coordinates
        << std::setw(14) << rel.str() << abs.str() << '\n';
  }
  std::ostringstream overall;
  overall << std::scientific << std::setprecision(3) << summary.max_relative_error;
  out << "max relative error " << overall.str() << '\n';
  return summary;
}

void cmd_stats(const RunConfig& config, const StatsOptions& options, std::ostream& out) {
  const CorpusBundle bundle = CorpusBundle::load(config.bundle);

  const auto references = reference_captions(bundle, config.eval_split);
  const DiversityStats gt = diversity_stats(references, bundle.training_captions());
  out << "ground truth (" << config.eval_split << ", " << references.size() << " captions)\n";
  out << "diversity " << fixed(gt.diversity, 2) << " novelty " << fixed(gt.novelty, 2)
      << " vocab " << gt.vocabulary << " length " << fixed(gt.mean_length, 1) << '\n';

  std::size_t captions = 0, chunks = 0, grounded = 0, trailing = 0;
  for (const auto* ex : bundle.split("train")) {
    for (const auto& c : ex->captions) {
      ++captions;
      const auto n = c.sequence.region_ids.size();
      chunks += n;
      grounded += ex->region_ids.size();
      if (n > 0 && c.sequence.region_ids.back() == kEmptyRegionId) ++trailing;
    }
  }
  if (captions > 0) {
    const double denom = static_cast<double>(captions);
    out << "train captions " << captions << " chunks/caption "
        << fixed(static_cast<double>(chunks) / denom, 2) << " regions/caption "
        << fixed(static_cast<double>(grounded) / denom, 2) << " trailing ungrounded "
        << fixed(100.0 * static_cast<double>(trailing) / denom, 2) << "%\n";
  }

  if (!options.export_chunks.empty()) {
    std::ofstream file(options.export_chunks, std::ios::trunc);
    if (!file) throw DataError("cannot write " + options.export_chunks);
    for (const auto* ex : bundle.split("train")) {
      for (const auto& c : ex->captions) {
        std::vector<std::string> line;
        for (const auto& tok : c.sequence.tokens) {
          if (tok == token::kBosText || tok == token::kEosText) continue;
          line.push_back(tok == token::kNextText ? "|" : tok);
        }
        file << text::join(line) << '\n';
      }
    }
  }

  const std::string tagged = options.tagged.empty() ? config.tagged : options.tagged;
  if (!tagged.empty() && std::filesystem::exists(tagged)) {
    std::ifstream in(tagged);
    const auto corpus = read_tagged_corpus(in);
    out << "pos end-of-chunk ppv (" << corpus.size() << " captions)\n";
    out << std::left << std::setw(8) << "tag" << std::setw(12) << "count" << std::setw(12)
        << "chunk_end" << "ppv\n";
    for (const auto& s : pos_chunk_stats(corpus)) {
      out << std::left << std::setw(8) << s.tag << std::setw(12) << s.occurrences
          << std::setw(12) << s.chunk_final << fixed(s.ppv, 2) << '\n';
    }
  } else if (!options.tagged.empty()) {
    throw DataError("tagged corpus not found: " + options.tagged);
  }
}

}  // namespace regionptr::cli
