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

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regionptr/corpus.h"
#include "regionptr/region_table.h"

namespace regionptr {

struct BundleCaption {
  std::vector<std::string> words;  // normalized, never UNK-replaced
  TrainingSequence sequence;
  std::vector<TokenId> token_ids;  // UNK for out-of-vocabulary words
};

// One unique (split, image, ordered grounded region sequence).
struct BundleExample {
  std::string split;
  std::string image_id;
  std::vector<std::string> region_ids;
  std::vector<BundleCaption> captions;
};

struct IngestOptions {
  std::size_t min_count = 5;
  std::size_t vocab_cap = 0;  // 0 = unlimited
};

// Encoded corpus: vocabulary from the "train" split, region table and the
// examples of every split in first-appearance order.
//
// File layout: "RPCB" u32 version=1, the vocabulary file text as one
// string, the region table, then the examples.
class CorpusBundle {
 public:
  Vocabulary vocab;
  RegionTable regions;
  std::vector<BundleExample> examples;

  std::vector<const BundleExample*> split(std::string_view name) const;
  std::size_t split_size(std::string_view name) const;
  // Space-joined normalized training captions, for novelty.
  std::set<std::string> training_captions() const;

  void save(const std::string& path) const;
  static CorpusBundle load(const std::string& path);
};

// Full preprocessing: parse, normalize, chunk, inject NEXT, group into
// unique examples and encode. Throws DataError naming the corpus line on
// any record that fails.
CorpusBundle build_bundle(std::span<const CorpusRecord> records,
                          RegionTable regions, const IngestOptions& options);

}  // namespace regionptr
