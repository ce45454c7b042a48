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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>
#include <sys/wait.h>

#include "commands.h"
#include "regionptr/bundle.h"
#include "regionptr/config.h"
#include "regionptr/dataset.h"
#include "regionptr/error.h"
#include "regionptr/trainer.h"
#include "support/generators.h"
#include "support/temp_dir.h"

namespace regionptr {
namespace {

using testing_support::read_file;
using testing_support::TempDir;
using testing_support::write_file;

// Tiny synthetic profile that trains in about a second.
constexpr std::string_view kSmallConfig = R"(# test profile
corpus = data/corpus.tsv
regions = data/regions.tsv
features = data/features.bin
tagged = data/tagged.txt
bundle = data/bundle.bin
checkpoint_dir = ckpt
candidates = candidates.tsv
report = report.txt
min_count = 1
embed_dim = 8
hidden_dim = 8
appearance_dim = 6
dropout = 0.3
learning_rate = 0.01
batch_size = 8
epochs = 6
validation_period = 2
seed = 4
eval_split = val
synth_seed = 2
synth_train_images = 12
synth_val_images = 3
synth_test_images = 3
synth_captions_per_image = 1
)";

RunConfig small_config(const TempDir& dir) {
  write_file(dir.file("run.conf"), std::string(kSmallConfig));
  std::filesystem::create_directories(dir.file("data"));
  return load_config(dir.file("run.conf"));
}

RunConfig prepared(const TempDir& dir) {
  const RunConfig c = small_config(dir);
  std::ostringstream sink;
  cli::cmd_synth(c, sink);
  cli::cmd_ingest(c, sink);
  return c;
}

TEST(ConfigTest, ParsesValuesAndResolvesPaths) {
  const RunConfig c = parse_config(
      "# comment\n"
      "hidden_dim = 32\n"
      "learning_rate=0.5\n"
      "teacher_guided = true\n"
      "bundle = sub/b.bin\n"
      "report = /abs/r.txt\n"
      "synth_regions_max = 4\n",
      "/base");
  EXPECT_EQ(c.hidden_dim, 32u);
  EXPECT_EQ(c.learning_rate, 0.5);
  EXPECT_TRUE(c.teacher_guided);
  EXPECT_EQ(c.bundle, "/base/sub/b.bin");
  EXPECT_EQ(c.report, "/abs/r.txt");
  EXPECT_EQ(c.synth.regions_max, 4u);
  EXPECT_EQ(c.embed_dim, 1024u);
  EXPECT_EQ(c.dropout, 0.7);
  EXPECT_EQ(c.model_config(50).vocab_size, 50u);
}

TEST(ConfigTest, ReportsLineOfBadEntries) {
  try {
    parse_config("seed = 1\nhiden_dim = 3\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("config line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("epochs = many\n"), DataError);
  EXPECT_THROW(parse_config("epochs\n"), DataError);
  EXPECT_THROW(load_config("/nonexistent/run.conf"), DataError);
}

TEST(IngestTest, ChildSceneMiniCorpus) {
  RegionTable regions;
  for (const char* id : {"1", "2", "4", "5"}) regions.add({"img", id, {{0, 0, 10, 10}}, 100, 100});
  regions.add({"img", "3", {}, 100, 100});
  const std::vector<CorpusRecord> records = {
      {"img",
       "[/EN#1/people A child] walking and leaving [/EN#2/other a trail] behind "
       "[/EN#3/people them] .",
       "train", 1},
      {"img",
       "[/EN#1/people A child] in [/EN#4/clothing a striped shirt] walks by "
       "[/EN#5/other some red chairs] .",
       "train", 2},
  };
  const CorpusBundle b = build_bundle(records, regions, {1, 0});
  ASSERT_EQ(b.examples.size(), 2u);
  EXPECT_EQ(b.examples[0].region_ids, (std::vector<std::string>{"1", "2"}));
  EXPECT_EQ(b.examples[1].region_ids, (std::vector<std::string>{"1", "4", "5"}));
  for (const auto& ex : b.examples) {
    ASSERT_EQ(ex.captions.size(), 1u);
    EXPECT_EQ(ex.captions[0].sequence.region_ids.size(), 3u);
  }
  EXPECT_EQ(b.examples[0].captions[0].sequence.render(),
            "BOS a child NEXT walking and leaving a trail NEXT behind them EOS");
  EXPECT_EQ(b.examples[1].captions[0].sequence.render(),
            "BOS a child NEXT in a striped shirt NEXT walks by some red chairs NEXT EOS");
}

TEST(IngestTest, GroupingMatchesOracle) {
  gen::Source src(1);
  RegionTable regions;
  for (int img = 0; img < 5; ++img) {
    for (int e = 0; e < 4; ++e) {
      regions.add({"i" + std::to_string(img), std::to_string(e), {{0, 0, 5, 5}}, 10, 10});
    }
  }
  std::vector<CorpusRecord> records;
  using Key = std::tuple<std::string, std::string, std::vector<std::string>>;
  std::map<Key, std::size_t> caption_count;
  std::vector<Key> order;
  const char* splits[] = {"train", "val", "test"};
  for (std::size_t n = 0; n < 100; ++n) {
    const std::string image = "i" + std::to_string(src.index(5));
    const std::string split = n < 3 ? splits[n] : splits[src.index(3)];
    std::string raw;
    std::vector<std::string> ids;
    const std::size_t k = src.between(1, 2);
    for (std::size_t j = 0; j < k; ++j) {
      const std::string id = std::to_string(src.index(4));
      if (!ids.empty() && ids.back() == id) continue;
      ids.push_back(id);
      raw += "[/EN#" + id + "/t word" + id + "] and ";
    }
    raw += "more";
    records.push_back({image, raw, split, n + 1});
    const Key key{split, image, ids};
    if (caption_count[key]++ == 0) order.push_back(key);
  }
  const CorpusBundle b = build_bundle(records, regions, {1, 0});
  ASSERT_EQ(b.examples.size(), order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& ex = b.examples[i];
    EXPECT_EQ(Key(ex.split, ex.image_id, ex.region_ids), order[i]);
    EXPECT_EQ(ex.captions.size(), caption_count[order[i]]);
  }
}

TEST(IngestTest, ErrorsNameTheLine) {
  RegionTable regions;
  const std::vector<CorpusRecord> records = {{"i", "a dog", "train", 1}, {"i", "", "train", 2}};
  try {
    build_bundle(records, regions, {1, 0});
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("corpus line 2"), std::string::npos) << e.what();
  }
  const std::vector<CorpusRecord> no_train = {{"i", "a dog", "test", 1}};
  EXPECT_THROW(build_bundle(no_train, regions, {1, 0}), DataError);
}

TEST(IngestTest, SynthAndIngestAreDeterministic) {
  TempDir a, b;
  const RunConfig ca = prepared(a);
  const RunConfig cb = prepared(b);
  for (const char* f : {"data/corpus.tsv", "data/regions.tsv", "data/features.bin",
                        "data/tagged.txt", "data/bundle.bin"}) {
    EXPECT_EQ(read_file(a.file(f)), read_file(b.file(f))) << f;
  }
  const std::string first = read_file(ca.bundle);
  std::ostringstream sink;
  cli::cmd_ingest(ca, sink);
  EXPECT_EQ(read_file(ca.bundle), first);
  EXPECT_NE(sink.str().find("split train examples 12"), std::string::npos) << sink.str();

  const CorpusBundle loaded = CorpusBundle::load(cb.bundle);
  EXPECT_EQ(loaded.vocab, CorpusBundle::load(ca.bundle).vocab);
  EXPECT_EQ(loaded.split_size("val"), 3u);
}

TEST(SelectorTest, KeepsStrictlyBestScore) {
  TempDir dir;
  CheckpointSelector s(dir.file("best.ckpt"));
  auto make = [](double v) {
    return [v] {
      nn::Checkpoint c;
      c.header["score"] = std::to_string(v);
      return c;
    };
  };
  EXPECT_TRUE(s.offer(3, 1, make(3)));
  EXPECT_TRUE(s.offer(7, 2, make(7)));
  EXPECT_FALSE(s.offer(5, 3, make(5)));
  EXPECT_FALSE(s.offer(7, 4, make(7.5)));
  EXPECT_EQ(*s.best_score(), 7);
  EXPECT_EQ(s.best_epoch(), 2u);
  EXPECT_EQ(nn::Checkpoint::load(dir.file("best.ckpt")).field("score"), std::to_string(7.0));
}

TEST(TrainTest, AbortKeepsEarlierBest) {
  TempDir dir;
  const RunConfig c = prepared(dir);
  const CorpusBundle bundle = CorpusBundle::load(c.bundle);
  const FeatureStore store = FeatureStore::load(c.features);
  const auto examples = training_examples(bundle, "train", store);
  const auto validation = validation_set(bundle, "val", store);
  Captioner model(c.model_config(bundle.vocab.size()), 1);
  TrainerOptions options;
  options.epochs = 50;
  options.batch_size = examples.size();
  options.validation_period = 1;
  options.optimizer = "sgd";
  options.learning_rate = 1e300;
  options.dropout = false;
  options.checkpoint_dir = dir.file("abort");
  std::ostringstream log;
  EXPECT_THROW(train(model, examples, validation, options, log), NumericError);
  EXPECT_NE(log.str().find("abort epoch"), std::string::npos) << log.str();
  EXPECT_NE(log.str().find("validate epoch 1"), std::string::npos) << log.str();
  const auto best = nn::Checkpoint::load(dir.file("abort/best.ckpt"));
  EXPECT_EQ(best.field("epoch"), "1");
}

TEST(TrainTest, RunsAreByteIdentical) {
  TempDir dir;
  const RunConfig c = prepared(dir);
  std::string logs[2], candidates[2], ckpts[2];
  for (int run = 0; run < 2; ++run) {
    std::ostringstream log, out;
    const auto result = cli::cmd_train(c, log);
    EXPECT_EQ(result.epoch_losses.size(), 6u);
    EXPECT_TRUE(result.best_cider.has_value());
    cli::cmd_generate(c, "", out);
    logs[run] = read_file(c.checkpoint_dir + "/train.log");
    EXPECT_EQ(log.str(), logs[run]);
    candidates[run] = read_file(c.candidates);
    ckpts[run] = read_file(c.checkpoint_dir + "/best.ckpt");
  }
  EXPECT_EQ(logs[0], logs[1]);
  EXPECT_EQ(candidates[0], candidates[1]);
  EXPECT_EQ(ckpts[0], ckpts[1]);
  EXPECT_FALSE(candidates[0].empty());

  // A different seed changes the trajectory.
  RunConfig other = c;
  other.seed = 5;
  other.checkpoint_dir = dir.file("other");
  std::ostringstream log;
  cli::cmd_train(other, log);
  EXPECT_NE(read_file(other.checkpoint_dir + "/train.log"), logs[0]);

  // Worker count does not change generated output.
  RunConfig threaded = c;
  threaded.workers = 3;
  std::ostringstream out;
  cli::cmd_generate(threaded, "", out);
  EXPECT_EQ(read_file(c.candidates), candidates[0]);
}

TEST(EvalTest, ReferencesAsCandidatesScorePerfectly) {
  TempDir dir;
  RunConfig c = prepared(dir);
  // Train captions include some of four or more words, so every BLEU order
  // has n-grams to score.
  c.eval_split = "train";
  const CorpusBundle bundle = CorpusBundle::load(c.bundle);
  std::vector<CandidateRecord> records;
  std::vector<Sentence> refs;
  std::size_t longest = 0;
  for (const auto* ex : bundle.split("train")) {
    ASSERT_EQ(ex->captions.size(), 1u);
    records.push_back({ex->image_id, ex->region_ids, ex->captions[0].words, {}, "-"});
    refs.push_back(ex->captions[0].words);
    longest = std::max(longest, refs.back().size());
  }
  ASSERT_GE(longest, 4u);
  {
    std::ofstream f(c.candidates);
    write_candidates(f, records);
  }
  std::ostringstream out;
  const auto reports = cli::cmd_eval(c, {}, "", out);
  ASSERT_EQ(reports.size(), 1u);
  for (double b : reports[0].bleu) EXPECT_DOUBLE_EQ(b, 1.0);
  EXPECT_DOUBLE_EQ(reports[0].rouge_l, 1.0);
  const auto gt = diversity_stats(refs, bundle.training_captions());
  EXPECT_EQ(reports[0].diversity.diversity, gt.diversity);
  EXPECT_EQ(reports[0].diversity.novelty, gt.novelty);
  EXPECT_EQ(reports[0].diversity.vocabulary, gt.vocabulary);
  EXPECT_EQ(read_file(c.report), out.str());

  const auto multi = cli::cmd_eval(c, {c.candidates, c.candidates}, "", out);
  EXPECT_EQ(multi.size(), 2u);
}

TEST(StatsTest, ReportsChunksAndPpv) {
  TempDir dir;
  const RunConfig c = prepared(dir);
  std::ostringstream out;
  cli::cmd_stats(c, {"", dir.file("chunks.txt")}, out);
  EXPECT_NE(out.str().find("ground truth"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("pos end-of-chunk ppv"), std::string::npos) << out.str();
  EXPECT_NE(read_file(dir.file("chunks.txt")).find(" | "), std::string::npos);
}

TEST(GradcheckCommandTest, PassesOnSmallModel) {
  RunConfig c = load_config(std::string(REGIONPTR_CONFIG_DIR) + "/gradcheck.conf");
  std::ostringstream out;
  const auto summary = cli::cmd_gradcheck(c, out);
  EXPECT_LT(summary.max_relative_error, 1e-4) << out.str();
  for (const auto& r : summary.arrays) EXPECT_GT(r.coordinates, 0u);
  c.vocab_cap = 0;
  EXPECT_THROW(cli::cmd_gradcheck(c, out), InvalidArgument);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(REGIONPTR_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(ExitCodeTest, MapsFailureKinds) {
  TempDir dir;
  const RunConfig c = prepared(dir);
  const std::string conf = dir.file("run.conf");
  EXPECT_EQ(run_cli(""), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  EXPECT_EQ(run_cli("train"), 1);
  EXPECT_EQ(run_cli("train --config " + conf + " --seed notanumber"), 1);
  EXPECT_EQ(run_cli("train --config " + conf + " --workers 0"), 1);
  EXPECT_EQ(run_cli("ingest --config " + dir.file("missing.conf")), 2);
  EXPECT_EQ(run_cli("generate --config " + conf + " --checkpoint " + dir.file("none.ckpt")), 2);
  EXPECT_EQ(run_cli("stats --config " + conf), 0);

  write_file(dir.file("boom.conf"), std::string(kSmallConfig) +
                                        "optimizer = sgd\nlearning_rate = 1e300\n"
                                        "dropout = 0\nbatch_size = 100\nepochs = 20\n");
  EXPECT_EQ(run_cli("train --config " + dir.file("boom.conf")), 3);
  EXPECT_EQ(run_cli("gradcheck --config " + std::string(REGIONPTR_CONFIG_DIR) + "/gradcheck.conf"),
            0);
}

}  // namespace
}  // namespace regionptr
