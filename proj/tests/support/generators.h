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
#include <random>
#include <string>
#include <vector>

#include "regionptr/corpus.h"
#include "regionptr/model.h"

// Random inputs for property tests. Uses its own engine so generated cases
// do not depend on the library's Rng.
namespace gen {

class Source {
 public:
  explicit Source(std::uint64_t seed) : engine_(seed) {}

  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }
  double real(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }

  // Word from a small alphabet so n-grams repeat.
  std::string word(std::size_t alphabet = 6) {
    return std::string(1, static_cast<char>('a' + index(alphabet)));
  }
  std::vector<std::string> sentence(std::size_t min_len, std::size_t max_len,
                                    std::size_t alphabet = 6) {
    std::vector<std::string> s(between(min_len, max_len));
    for (auto& w : s) w = word(alphabet);
    return s;
  }
  Eigen::VectorXd vector(std::size_t n, double scale = 1.0) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = real(-scale, scale);
    return v;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

// Token sequence BOS w.. NEXT w.. NEXT ... [w..] EOS with `regions` NEXTs.
inline std::vector<regionptr::TokenId> sequence(Source& src, std::size_t regions,
                                                std::size_t vocab_size) {
  using namespace regionptr::token;
  std::vector<regionptr::TokenId> t{kBos};
  auto word = [&] {
    return static_cast<regionptr::TokenId>(kFirstWordId + src.index(vocab_size - kFirstWordId));
  };
  for (std::size_t r = 0; r < regions; ++r) {
    const std::size_t n = src.between(1, 3);
    for (std::size_t k = 0; k < n; ++k) t.push_back(word());
    t.push_back(kNext);
  }
  if (regions == 0 || src.coin()) {
    const std::size_t n = src.between(1, 2);
    for (std::size_t k = 0; k < n; ++k) t.push_back(word());
  }
  t.push_back(kEos);
  return t;
}

inline regionptr::TrainingExample example(Source& src, const regionptr::ModelConfig& cfg,
                                          std::size_t regions) {
  regionptr::TrainingExample ex;
  ex.tokens = sequence(src, regions, cfg.vocab_size);
  for (std::size_t r = 0; r < regions; ++r) {
    ex.regions.emplace_back(src.vector(cfg.region_dim()));
  }
  ex.full_image = regionptr::RegionFeatureVector(src.vector(cfg.region_dim()));
  return ex;
}

inline regionptr::ModelConfig toy_config(std::size_t E = 6, std::size_t H = 5,
                                         std::size_t D = 4, std::size_t V = 11) {
  regionptr::ModelConfig c;
  c.embed_dim = E;
  c.hidden_dim = H;
  c.appearance_dim = D;
  c.vocab_size = V;
  c.dropout = 0.0;
  return c;
}

}  // namespace gen
