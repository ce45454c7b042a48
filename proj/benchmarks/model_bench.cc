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

#include <benchmark/benchmark.h>

#include <random>

#include "regionptr/decode.h"
#include "regionptr/model.h"

namespace regionptr {
namespace {

ModelConfig bench_config(std::size_t hidden) {
  ModelConfig c;
  c.embed_dim = hidden;
  c.hidden_dim = hidden;
  c.appearance_dim = 64;
  c.vocab_size = 500;
  c.dropout = 0.7;
  return c;
}

TrainingExample bench_example(const ModelConfig& c, std::mt19937_64& rng) {
  std::uniform_int_distribution<TokenId> word(token::kFirstWordId,
                                              static_cast<TokenId>(c.vocab_size - 1));
  TrainingExample ex;
  ex.tokens = {token::kBos};
  for (int r = 0; r < 3; ++r) {
    for (int k = 0; k < 4; ++k) ex.tokens.push_back(word(rng));
    ex.tokens.push_back(token::kNext);
    ex.regions.emplace_back(Eigen::VectorXd::Random(static_cast<Eigen::Index>(c.region_dim())));
  }
  ex.tokens.push_back(token::kEos);
  ex.full_image = RegionFeatureVector(Eigen::VectorXd::Random(static_cast<Eigen::Index>(c.region_dim())));
  return ex;
}

void BM_TrainStep(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
  Captioner model(cfg, 1);
  std::mt19937_64 rng(2);
  std::vector<TrainingExample> batch;
  for (int k = 0; k < 8; ++k) batch.push_back(bench_example(cfg, rng));
  nn::Adam adam(1e-4);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_step(model, batch, &adam, {}, seed++));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(batch.size()));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Generate(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<std::size_t>(state.range(0)));
  Captioner model(cfg, 1);
  std::mt19937_64 rng(3);
  const auto ex = bench_example(cfg, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate(model, ex.full_image, ex.regions).tokens.size());
  }
}
BENCHMARK(BM_Generate)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace regionptr
