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

#include "regionptr/decode.h"

#include <algorithm>

#include "regionptr/error.h"

namespace regionptr {

RegionFeatureVector current_region(const DecoderState& state) {
  if (state.region_pointer < state.region_sequence.size()) {
    return state.region_sequence[state.region_pointer];
  }
  return empty_region(state.appearance_dim);
}

AppliedToken apply_token(DecoderState& state, TokenId token) {
  if (state.done) throw InvalidArgument("apply_token on a finished decoder");
  const std::size_t len = state.region_sequence.size();
  AppliedToken applied{token, false};
  if (token == token::kEos && state.region_pointer < len) {
    applied = {token::kNext, true};
  }
  if (applied.token == token::kNext) {
    state.region_pointer = std::min(state.region_pointer + 1, len);
  } else if (applied.token == token::kEos) {
    state.done = true;
  }
  state.emitted.push_back(applied.token);
  ++state.step;
  return applied;
}

TokenId sample_argmax(const nn::Vector& logits,
                      std::span<const TokenId> suppressed) {
  TokenId best = -1;
  double best_value = 0;
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const auto id = static_cast<TokenId>(i);
    if (std::find(suppressed.begin(), suppressed.end(), id) != suppressed.end()) {
      continue;
    }
    if (best < 0 || logits[i] > best_value) {
      best = id;
      best_value = logits[i];
    }
  }
  if (best < 0) throw InvalidArgument("sample_argmax: every token is suppressed");
  return best;
}

std::vector<TokenId> Generation::words() const {
  std::vector<TokenId> out;
  for (TokenId t : tokens) {
    if (t != token::kNext && t != token::kEos && t != token::kBos) out.push_back(t);
  }
  return out;
}

Generation generate(const Captioner& model,
                    const RegionFeatureVector& full_image,
                    std::vector<RegionFeatureVector> region_sequence,
                    const GenerateOptions& options) {
  if (options.max_len == 0) throw InvalidArgument("max_len must be at least 1");
  const std::size_t D = model.config().appearance_dim;
  DecoderState state;
  state.appearance_dim = D;
  if (options.ablation) {
    // Same pooled vector for every requested region.
    const RegionFeatureVector pooled = ablation_pool(region_sequence, D);
    std::fill(region_sequence.begin(), region_sequence.end(), pooled);
  }
  state.region_sequence = std::move(region_sequence);
  state.lstm = model.init_state(full_image);

  Generation gen;
  std::vector<TokenId> chunk;
  TokenId prev = token::kBos;
  while (!state.done && state.step < options.max_len) {
    const std::size_t pointer = state.region_pointer;
    const bool empty = pointer >= state.region_sequence.size();
    Captioner::Step out = model.forward_step(state.lstm, prev, current_region(state));
    const TokenId sampled = sample_argmax(out.logits, options.suppressed);
    const AppliedToken applied = apply_token(state, sampled);

    DecodeRecord rec;
    rec.step = {state.step, pointer, empty, out.alpha, prev, applied.token};
    rec.sampled = sampled;
    rec.rewritten = applied.rewritten;
    gen.trace.push_back(rec);

    if (applied.token == token::kNext) {
      gen.chunks.push_back(std::move(chunk));
      chunk.clear();
    } else if (applied.token != token::kEos) {
      chunk.push_back(applied.token);
    }
    state.lstm = std::move(out.state);
    prev = applied.token;
  }
  gen.natural_end = state.done;
  if (!state.done) {
    gen.undescribed = state.region_sequence.size() - state.region_pointer;
    state.emitted.push_back(token::kEos);
    state.done = true;
  }
  if (!chunk.empty()) gen.chunks.push_back(std::move(chunk));
  gen.tokens = std::move(state.emitted);
  return gen;
}

}  // namespace regionptr
