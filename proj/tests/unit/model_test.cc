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

#include <cmath>
#include <sstream>

#include "oracles/model_oracle.h"
#include "regionptr/error.h"
#include "regionptr/model.h"
#include "regionptr/nn/gradcheck.h"
#include "support/generators.h"
#include "support/temp_dir.h"

namespace regionptr {
namespace {

std::vector<int> ints(const std::vector<TokenId>& t) { return {t.begin(), t.end()}; }

std::vector<std::vector<double>> regions_of(const TrainingExample& ex) {
  std::vector<std::vector<double>> out;
  for (const auto& r : ex.regions) out.push_back(oracle::to_std(r.values()));
  return out;
}

// Random weights at a larger scale than init so the checks are not
// dominated by near-zero activations.
Captioner random_model(const ModelConfig& cfg, std::uint64_t seed) {
  Captioner m(cfg, seed);
  gen::Source src(seed + 1000);
  for (auto& p : m.parameters()) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = src.real(-0.5, 0.5);
  }
  return m;
}

TEST(ModelConfigTest, Validation) {
  ModelConfig c = gen::toy_config();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.region_dim(), 9u);
  EXPECT_EQ(c.input_dim(), 15u);
  c.vocab_size = token::kFirstWordId;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = gen::toy_config();
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = gen::toy_config();
  c.hidden_dim = 0;
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(CaptionerTest, ParameterShapes) {
  const auto cfg = gen::toy_config(6, 5, 4, 11);
  Captioner m(cfg, 1);
  const auto& p = m.parameters();
  auto shape = [&](const char* name) {
    const auto& v = p.at(name).value;
    return std::make_pair(v.rows(), v.cols());
  };
  using P = std::pair<Eigen::Index, Eigen::Index>;
  EXPECT_EQ(shape("embedding"), P(11, 6));
  EXPECT_EQ(shape("gate.w"), P(5, 1));
  EXPECT_EQ(shape("gate.b"), P(1, 1));
  EXPECT_EQ(shape("lstm.l0.w_x"), P(15, 20));
  EXPECT_EQ(shape("lstm.l1.w_x"), P(5, 20));
  EXPECT_EQ(shape("lstm.l1.w_h"), P(5, 20));
  EXPECT_EQ(shape("output.w"), P(5, 11));
  EXPECT_EQ(shape("init_h.w"), P(9, 10));
  EXPECT_EQ(shape("init_c.b"), P(10, 1));
}

TEST(CaptionerTest, ForwardStepMatchesScalarOracle) {
  gen::Source src(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto cfg = gen::toy_config(src.between(2, 7), src.between(2, 7), src.between(1, 5),
                                     src.between(5, 12));
    const Captioner m = random_model(cfg, static_cast<std::uint64_t>(trial));
    const RegionFeatureVector full(src.vector(cfg.region_dim()));
    nn::LstmState state = m.init_state(full);
    oracle::ScalarState scalar = oracle::initial_state(m, oracle::to_std(full.values()));
    for (std::size_t l = 0; l < kLstmLayers; ++l) {
      for (std::size_t j = 0; j < cfg.hidden_dim; ++j) {
        ASSERT_NEAR(state[l].h[static_cast<Eigen::Index>(j)], scalar.h[l][j], 1e-12);
        ASSERT_NEAR(state[l].c[static_cast<Eigen::Index>(j)], scalar.c[l][j], 1e-12);
      }
    }
    TokenId prev = token::kBos;
    for (int t = 0; t < 4; ++t) {
      const RegionFeatureVector region(src.vector(cfg.region_dim()));
      const auto out = m.forward_step(state, prev, region);
      const auto ref = oracle::step(m, scalar, prev, oracle::to_std(region.values()));
      EXPECT_NEAR(out.alpha, ref.alpha, 1e-12);
      for (std::size_t v = 0; v < cfg.vocab_size; ++v) {
        EXPECT_NEAR(out.logits[static_cast<Eigen::Index>(v)], ref.logits[v], 1e-10);
      }
      state = out.state;
      scalar = ref.state;
      prev = static_cast<TokenId>(src.index(cfg.vocab_size));
    }
  }
}

TEST(CaptionerTest, GateAndComposition) {
  const auto cfg = gen::toy_config();
  Captioner m(cfg, 2);
  m.parameters().at("gate.b").value(0, 0) = 0.3;
  m.parameters().at("gate.w").value.setZero();
  EXPECT_NEAR(m.gate(nn::Vector::Ones(5)), 1.0 / (1.0 + std::exp(-0.3)), 1e-15);
  const nn::Vector x = compose_input(0.25, nn::Vector::Ones(2), nn::Vector::Constant(3, 2.0));
  EXPECT_EQ(x, (nn::Vector(5) << 0.25, 0.25, 1.5, 1.5, 1.5).finished());
}

TEST(CaptionerTest, RejectsBadInputs) {
  const auto cfg = gen::toy_config();
  Captioner m(cfg, 2);
  const RegionFeatureVector full(nn::Vector::Zero(9));
  const auto state = m.init_state(full);
  EXPECT_THROW(m.forward_step(state, 11, full), InvalidArgument);
  EXPECT_THROW(m.forward_step(state, -1, full), InvalidArgument);
  EXPECT_THROW(m.forward_step(state, 4, RegionFeatureVector(nn::Vector::Zero(8))),
               InvalidArgument);
  EXPECT_THROW(m.init_state(RegionFeatureVector(nn::Vector::Zero(10))), InvalidArgument);
}

TEST(SequenceLossTest, MatchesCompositionalOracle) {
  gen::Source src(6);
  for (int trial = 0; trial < 30; ++trial) {
    const auto cfg = gen::toy_config(src.between(2, 6), src.between(2, 6), src.between(1, 4),
                                     src.between(5, 10));
    const Captioner m = random_model(cfg, static_cast<std::uint64_t>(trial));
    const auto ex = gen::example(src, cfg, src.between(0, 4));
    for (bool ablation : {false, true}) {
      const double got = sequence_loss(m, ex, ablation).loss;
      const double want = oracle::sequence_loss(m, ints(ex.tokens), regions_of(ex),
                                                oracle::to_std(ex.full_image.values()), ablation);
      EXPECT_NEAR(got, want, 1e-10) << "trial " << trial << " ablation " << ablation;
    }
  }
}

TEST(SequenceLossTest, PointerFollowsNextTokens) {
  gen::Source src(7);
  const auto cfg = gen::toy_config();
  const Captioner m(cfg, 3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t len = src.between(0, 5);
    const auto ex = gen::example(src, cfg, len);
    const auto trace = sequence_loss(m, ex).trace;
    ASSERT_EQ(trace.size(), ex.tokens.size() - 1);
    std::size_t nexts_before = 0;
    for (std::size_t t = 1; t < ex.tokens.size(); ++t) {
      if (ex.tokens[t - 1] == token::kNext) ++nexts_before;
      const auto& r = trace[t - 1];
      EXPECT_EQ(r.step, t);
      EXPECT_EQ(r.input, ex.tokens[t - 1]);
      EXPECT_EQ(r.output, ex.tokens[t]);
      EXPECT_EQ(r.pointer, nexts_before);
      EXPECT_EQ(r.empty_region, nexts_before >= len);
      EXPECT_GT(r.alpha, 0.0);
      EXPECT_LT(r.alpha, 1.0);
      if (t > 1) {
        EXPECT_GE(r.pointer, trace[t - 2].pointer);
      }
    }
  }
}

TEST(SequenceLossTest, UniformOutputGivesLogV) {
  const auto cfg = gen::toy_config();
  Captioner m(cfg, 3);
  m.parameters().at("output.w").value.setZero();
  m.parameters().at("output.b").value.setZero();
  gen::Source src(8);
  const auto ex = gen::example(src, cfg, 2);
  EXPECT_NEAR(sequence_loss(m, ex).loss, std::log(11.0), 1e-12);
}

TEST(TeacherRegionTest, PointerAndAblation) {
  gen::Source src(9);
  const auto cfg = gen::toy_config();
  const auto ex = gen::example(src, cfg, 3);
  EXPECT_EQ(teacher_region(ex, 1, false, 4).values(), ex.regions[1].values());
  EXPECT_EQ(teacher_region(ex, 3, false, 4).values(), nn::Vector::Zero(9));
  EXPECT_EQ(teacher_region(ex, 3, true, 4).values(), nn::Vector::Zero(9));
  const auto pooled = teacher_region(ex, 0, true, 4);
  EXPECT_EQ(pooled.values(), teacher_region(ex, 2, true, 4).values());
  const nn::Vector mean =
      (ex.regions[0].appearance() + ex.regions[1].appearance() + ex.regions[2].appearance()) / 3;
  EXPECT_LT((pooled.appearance() - mean).norm(), 1e-15);
  EXPECT_EQ(pooled.values().tail(5), nn::Vector::Zero(5));
}

TEST(ValidateExampleTest, Errors) {
  gen::Source src(10);
  const auto cfg = gen::toy_config();
  const auto good = gen::example(src, cfg, 2);
  EXPECT_NO_THROW(validate_example(good, cfg));

  auto bad = good;
  bad.tokens.front() = token::kUnk;
  EXPECT_THROW(validate_example(bad, cfg), DataError);
  bad = good;
  bad.tokens.pop_back();
  EXPECT_THROW(validate_example(bad, cfg), DataError);
  bad = good;
  bad.tokens.insert(bad.tokens.begin() + 1, token::kEos);
  EXPECT_THROW(validate_example(bad, cfg), DataError);
  bad = good;
  bad.tokens.insert(bad.tokens.begin() + 1, token::kBos);
  EXPECT_THROW(validate_example(bad, cfg), DataError);
  bad = good;
  bad.tokens.insert(bad.tokens.begin() + 1, 11);
  EXPECT_THROW(validate_example(bad, cfg), DataError);
  bad = good;
  bad.regions.pop_back();
  EXPECT_THROW(validate_example(bad, cfg), DataError);
  bad = good;
  bad.regions[0] = RegionFeatureVector(nn::Vector::Zero(10));
  EXPECT_THROW(validate_example(bad, cfg), DataError);
  bad = good;
  bad.full_image = RegionFeatureVector(nn::Vector::Zero(8));
  EXPECT_THROW(validate_example(bad, cfg), DataError);
}

TEST(TrainStepTest, EveryParameterReceivesGradient) {
  gen::Source src(11);
  const auto cfg = gen::toy_config();
  Captioner m(cfg, 4);
  std::vector<TrainingExample> batch;
  for (int k = 0; k < 4; ++k) batch.push_back(gen::example(src, cfg, 2));
  const double loss = train_step(m, batch, nullptr, {false, false}, 0);
  EXPECT_GT(loss, 0.0);
  for (const auto& p : m.parameters()) {
    EXPECT_GT(p.grad.cwiseAbs().maxCoeff(), 0.0) << p.name;
  }
}

TEST(TrainStepTest, LossIsBatchMeanOfSequenceLosses) {
  gen::Source src(12);
  const auto cfg = gen::toy_config();
  Captioner m = random_model(cfg, 5);
  std::vector<TrainingExample> batch;
  double sum = 0;
  for (int k = 0; k < 5; ++k) {
    batch.push_back(gen::example(src, cfg, src.between(0, 3)));
    sum += sequence_loss(m, batch.back()).loss;
  }
  EXPECT_NEAR(train_step(m, batch, nullptr, {false, false}, 0), sum / 5, 1e-12);
  EXPECT_THROW(train_step(m, std::span<const TrainingExample>{}, nullptr, {}, 0),
               InvalidArgument);
}

TEST(TrainStepTest, GradientsMatchFiniteDifferences) {
  gen::Source src(13);
  for (bool ablation : {false, true}) {
    const auto cfg = gen::toy_config(5, 4, 3, 9);
    Captioner m = random_model(cfg, ablation ? 7 : 6);
    std::vector<TrainingExample> batch;
    for (std::size_t k = 0; k < 3; ++k) batch.push_back(gen::example(src, cfg, k + 1));
    auto loss = [&] { return train_step(m, batch, nullptr, {ablation, false}, 0); };
    loss();
    const auto results = nn::finite_difference_check(loss, m.parameters(), 1e-2, 200, 1,
                                                     nn::Stencil::kFourPoint);
    for (const auto& r : results) EXPECT_LT(r.max_relative_error, 1e-4) << r.name;
  }
}

TEST(TrainStepTest, DeterministicUnderSeeds) {
  gen::Source src(14);
  auto cfg = gen::toy_config();
  cfg.dropout = 0.5;
  std::vector<TrainingExample> batch;
  for (int k = 0; k < 3; ++k) batch.push_back(gen::example(src, cfg, 2));
  Captioner a(cfg, 9), b(cfg, 9);
  EXPECT_EQ(a.parameters().at("lstm.l0.w_x").value, b.parameters().at("lstm.l0.w_x").value);
  nn::Adam oa(0.01), ob(0.01);
  for (int step = 0; step < 3; ++step) {
    EXPECT_EQ(train_step(a, batch, &oa, {}, 42 + step), train_step(b, batch, &ob, {}, 42 + step));
  }
  EXPECT_EQ(a.parameters().at("output.w").value, b.parameters().at("output.w").value);

  Captioner c(cfg, 9);
  const double with_seed_1 = train_step(c, batch, nullptr, {}, 1);
  const double with_seed_2 = train_step(c, batch, nullptr, {}, 2);
  const double no_dropout = train_step(c, batch, nullptr, {false, false}, 1);
  EXPECT_NE(with_seed_1, with_seed_2);
  EXPECT_EQ(no_dropout, train_step(c, batch, nullptr, {false, false}, 2));
  EXPECT_NEAR(no_dropout, sequence_loss(c, batch[0]).loss / 3 + sequence_loss(c, batch[1]).loss / 3 +
                              sequence_loss(c, batch[2]).loss / 3,
              1e-12);
}

TEST(TrainStepTest, OverfitsOneSequence) {
  gen::Source src(15);
  const auto cfg = gen::toy_config(8, 8, 4, 12);
  Captioner m(cfg, 10);
  const std::vector<TrainingExample> batch{gen::example(src, cfg, 2)};
  nn::Adam adam(0.05);
  const double first = train_step(m, batch, &adam, {false, false}, 0);
  double last = first;
  for (int step = 0; step < 150; ++step) last = train_step(m, batch, &adam, {false, false}, 0);
  EXPECT_LT(last, 0.05 * first);
}

TEST(CheckpointTest, RoundTripPreservesModelAndOptimizer) {
  testing_support::TempDir dir;
  gen::Source src(16);
  const auto cfg = gen::toy_config();
  Captioner m(cfg, 11);
  std::vector<TrainingExample> batch{gen::example(src, cfg, 1), gen::example(src, cfg, 2)};
  nn::Adam adam(0.01);
  for (int k = 0; k < 3; ++k) train_step(m, batch, &adam, {false, false}, 0);

  m.to_checkpoint(&adam).save(dir.file("m.ckpt"));
  const auto ck = nn::Checkpoint::load(dir.file("m.ckpt"));
  Captioner back = Captioner::from_checkpoint(ck);
  EXPECT_EQ(back.config().vocab_size, cfg.vocab_size);
  EXPECT_EQ(back.config().appearance_dim, cfg.appearance_dim);
  for (const auto& p : m.parameters()) {
    EXPECT_EQ(back.parameters().at(p.name).value, p.value) << p.name;
  }
  nn::Adam restored(0.01);
  back.restore_optimizer(ck, restored);
  EXPECT_EQ(restored.steps(), 3);
  EXPECT_EQ(train_step(m, batch, &adam, {false, false}, 0),
            train_step(back, batch, &restored, {false, false}, 0));
  EXPECT_EQ(m.parameters().at("embedding").value, back.parameters().at("embedding").value);

  auto broken = ck;
  broken.arrays[0].second = nn::Matrix::Zero(1, 1);
  EXPECT_THROW(Captioner::from_checkpoint(broken), DataError);
}

TEST(TraceTest, WritesOneLinePerStep) {
  gen::Source src(17);
  const auto cfg = gen::toy_config();
  const Captioner m(cfg, 12);
  const auto ex = gen::example(src, cfg, 2);
  const auto trace = sequence_loss(m, ex).trace;
  std::ostringstream out;
  write_trace(out, trace);
  const std::string text = out.str();
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), trace.size());
}

}  // namespace
}  // namespace regionptr
