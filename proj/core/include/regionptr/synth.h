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
#include <string>
#include <vector>

#include "regionptr/corpus.h"
#include "regionptr/features.h"
#include "regionptr/metrics.h"
#include "regionptr/region_table.h"

namespace regionptr {

// Parameters of the synthetic grounded-caption generator.
//
// Every entity belongs to one of six classes (person, clothing, animal,
// object, place, vehicle) and is described by "det adj noun". A chunk after
// the first is introduced by a class-specific connector ("wearing", "walks
// with", ...), so chunk ends fall on nouns. Captions whose last region is a
// person or a place get a trailing unboxed chunk. Appearance features are
// class, noun and adjective prototypes plus Gaussian noise.
struct SyntheticSpec {
  std::uint64_t seed = 7;
  std::size_t train_images = 40;
  std::size_t val_images = 5;
  std::size_t test_images = 5;
  std::size_t regions_min = 1;
  std::size_t regions_max = 3;
  std::size_t captions_per_image = 2;
  std::size_t nouns_per_class = 4;  // 1..6, also the adjective count
  double noise = 0.05;

  // Throws InvalidArgument on an empty or inverted range.
  void validate() const;
};

struct SyntheticData {
  std::vector<CorpusRecord> corpus;
  RegionTable regions;
  FeatureStore features;
  std::vector<TaggedCaption> tagged;  // normalized train captions

  explicit SyntheticData(std::size_t appearance_dim) : features(appearance_dim) {}
};

SyntheticData synthesize(const SyntheticSpec& spec, std::size_t appearance_dim);

struct SyntheticPaths {
  std::string corpus;
  std::string regions;
  std::string features;
  std::string tagged;
};

void write_synthetic(const SyntheticData& data, const SyntheticPaths& paths);

}  // namespace regionptr
