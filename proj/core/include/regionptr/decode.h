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

#include <span>
#include <vector>

#include "regionptr/corpus.h"
#include "regionptr/features.h"
#include "regionptr/model.h"

namespace regionptr {

struct DecoderState {
  nn::LstmState lstm;
  // 0-based; equal to region_sequence.size() once every region has been
  // consumed, at which point the empty region is active.
  std::size_t region_pointer = 0;
  std::vector<RegionFeatureVector> region_sequence;
  std::size_t appearance_dim = 0;
  std::vector<TokenId> emitted;  // words and NEXT, plus the final EOS
  std::size_t step = 0;
  bool done = false;
};

RegionFeatureVector current_region(const DecoderState& state);

struct AppliedToken {
  TokenId token = 0;       // after the EOS-as-NEXT rewrite
  bool rewritten = false;  // EOS arrived with regions left
};

// Advances the state machine by one emitted token:
//   NEXT                  -> pointer + 1, saturating at len
//   EOS, pointer < len    -> treated as NEXT
//   EOS, pointer == len   -> done
//   anything else         -> appended, pointer unchanged
// Throws InvalidArgument if the state is already done.
AppliedToken apply_token(DecoderState& state, TokenId token);

// Argmax over the entries not in `suppressed`, lowest id on ties. Throws
// InvalidArgument when every entry is suppressed.
TokenId sample_argmax(const nn::Vector& logits,
                      std::span<const TokenId> suppressed);

struct GenerateOptions {
  std::size_t max_len = 30;
  std::vector<TokenId> suppressed = {token::kUnk, token::kBos};
  bool ablation = false;
};

struct DecodeRecord {
  TraceRecord step;       // step.output is the token fed forward
  TokenId sampled = 0;    // raw argmax before any rewrite
  bool rewritten = false;
};

struct Generation {
  std::vector<TokenId> tokens;               // emitted, ends with EOS
  std::vector<std::vector<TokenId>> chunks;  // words split at NEXT events
  std::vector<DecodeRecord> trace;
  bool natural_end = false;       // EOS produced by the model
  std::size_t undescribed = 0;    // regions left when EOS was forced

  std::vector<TokenId> words() const;
};

// Greedy generation: init_state from the full image, then forward_step /
// sample_argmax / apply_token until EOS or max_len steps. When max_len is
// hit, EOS is appended and the remaining regions are reported in
// `undescribed`.
Generation generate(const Captioner& model,
                    const RegionFeatureVector& full_image,
                    std::vector<RegionFeatureVector> region_sequence,
                    const GenerateOptions& options = {});

}  // namespace regionptr
