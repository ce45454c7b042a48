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

#include "regionptr/synth.h"

#include <algorithm>
#include <array>
#include <fstream>

#include "regionptr/error.h"
#include "regionptr/random.h"

namespace regionptr {
namespace {

struct WordClass {
  std::string_view type;
  std::array<std::string_view, 6> nouns;
  std::string_view noun_tag;
  std::string_view det;
  std::vector<std::pair<std::string_view, std::string_view>> connector;
  std::vector<std::pair<std::string_view, std::string_view>> trailing;
};

const std::array<WordClass, 6>& classes() {
  static const std::array<WordClass, 6> kClasses = {{
      {"people",
       {"man", "woman", "child", "boy", "girl", "worker"},
       "NN",
       "a",
       {{"next", "JJ"}, {"to", "TO"}},
       {{"behind", "IN"}, {"them", "PRP"}}},
      {"clothing",
       {"shirt", "hat", "jacket", "dress", "scarf", "coat"},
       "NN",
       "a",
       {{"wearing", "VBG"}},
       {}},
      {"animals",
       {"dog", "cat", "horse", "bird", "cow", "sheep"},
       "NN",
       "a",
       {{"walks", "VBZ"}, {"with", "IN"}},
       {}},
      {"other",
       {"chairs", "balls", "boxes", "bags", "bikes", "flowers"},
       "NNS",
       "some",
       {{"holding", "VBG"}},
       {}},
      {"scene",
       {"street", "park", "beach", "field", "road", "river"},
       "NN",
       "the",
       {{"in", "IN"}},
       {{"on", "IN"}, {"a", "DT"}, {"sunny", "JJ"}, {"day", "NN"}}},
      {"vehicles",
       {"car", "bus", "truck", "boat", "train", "bicycle"},
       "NN",
       "a",
       {{"near", "IN"}},
       {}},
  }};
  return kClasses;
}

constexpr std::array<std::string_view, 6> kAdjectives = {"red",   "blue", "green",
                                                         "small", "large", "old"};

struct Entity {
  std::string id;
  std::size_t cls = 0;
  std::size_t noun = 0;
  std::size_t adj = 0;
};

Eigen::VectorXd prototype(std::uint64_t seed, std::string_view label, std::size_t dim) {
  Rng rng(derive_seed(seed, label));
  Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-1.0, 1.0);
  return v;
}

Eigen::VectorXd noisy(const Eigen::VectorXd& base, double noise, Rng& rng) {
  Eigen::VectorXd v = base;
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += noise * rng.normal();
  return v;
}

BoundingBox random_box(double w, double h, Rng& rng) {
  const double x1 = std::floor(rng.uniform(0.0, w * 0.6));
  const double y1 = std::floor(rng.uniform(0.0, h * 0.6));
  const double x2 = std::min(w, x1 + 10.0 + std::floor(rng.uniform(0.0, w * 0.4)));
  const double y2 = std::min(h, y1 + 10.0 + std::floor(rng.uniform(0.0, h * 0.4)));
  return {x1, y1, x2, y2};
}

}  // namespace

void SyntheticSpec::validate() const {
  if (train_images == 0) throw InvalidArgument("synth_train_images must be positive");
  if (regions_min == 0 || regions_min > regions_max) {
    throw InvalidArgument("synth region range must satisfy 1 <= min <= max");
  }
  if (regions_max > classes().size()) {
    throw InvalidArgument("synth_regions_max is at most " + std::to_string(classes().size()));
  }
  if (captions_per_image == 0) throw InvalidArgument("synth_captions_per_image must be positive");
  if (nouns_per_class == 0 || nouns_per_class > 6) {
    throw InvalidArgument("synth_nouns_per_class must be in 1..6");
  }
  if (!(noise >= 0.0)) throw InvalidArgument("synth_noise must be non-negative");
}

SyntheticData synthesize(const SyntheticSpec& spec, std::size_t appearance_dim) {
  spec.validate();
  if (appearance_dim == 0) throw InvalidArgument("appearance_dim must be positive");
  SyntheticData data(appearance_dim);
  Rng rng(spec.seed);
  std::size_t next_entity = 1;

  const std::size_t total = spec.train_images + spec.val_images + spec.test_images;
  for (std::size_t img = 0; img < total; ++img) {
    const std::string split = img < spec.train_images                     ? "train"
                              : img < spec.train_images + spec.val_images ? "val"
                                                                           : "test";
    const std::string image_id = "img" + std::to_string(img + 1);
    const double width = 300.0 + static_cast<double>(rng.below(201));
    const double height = 300.0 + static_cast<double>(rng.below(201));

    // Distinct classes per image.
    std::vector<std::size_t> pool(classes().size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    const std::size_t count =
        spec.regions_min + rng.below(spec.regions_max - spec.regions_min + 1);
    std::vector<Entity> entities;
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t pick = k + rng.below(pool.size() - k);
      std::swap(pool[k], pool[pick]);
      Entity e;
      e.id = std::to_string(next_entity++);
      e.cls = pool[k];
      e.noun = rng.below(spec.nouns_per_class);
      e.adj = rng.below(spec.nouns_per_class);
      entities.push_back(e);
    }

    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(appearance_dim));
    for (const auto& e : entities) {
      const WordClass& wc = classes()[e.cls];
      const Eigen::VectorXd base =
          prototype(spec.seed, std::string("class/") + std::string(wc.type), appearance_dim) +
          prototype(spec.seed, std::string("noun/") + std::string(wc.nouns[e.noun]),
                    appearance_dim) +
          0.5 * prototype(spec.seed, std::string("adj/") + std::string(kAdjectives[e.adj]),
                          appearance_dim);
      full += base;
      RegionEntry entry{image_id, e.id, {}, width, height};
      const std::size_t boxes = 1 + rng.below(2);
      for (std::size_t b = 0; b < boxes; ++b) {
        entry.boxes.push_back(random_box(width, height, rng));
        data.features.add(e.id, noisy(base, spec.noise, rng));
      }
      data.regions.add(std::move(entry));
    }
    full /= static_cast<double>(entities.size());
    data.features.add(std::string(kFullImagePrefix) + image_id, noisy(full, spec.noise, rng));

    // Unboxed entity referenced by trailing chunks.
    const std::string unboxed_id = std::to_string(next_entity++);
    data.regions.add(RegionEntry{image_id, unboxed_id, {}, width, height});

    for (std::size_t c = 0; c < spec.captions_per_image; ++c) {
      // Ordered subset: a random permutation prefix of the entities.
      std::vector<std::size_t> order(entities.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.below(i)]);
      }
      order.resize(1 + rng.below(entities.size()));

      std::string raw;
      TaggedCaption tagged;
      auto emit = [&](std::string_view word, std::string_view tag, bool chunk_final) {
        tagged.push_back({std::string(word), std::string(tag), chunk_final});
      };
      for (std::size_t i = 0; i < order.size(); ++i) {
        const Entity& e = entities[order[i]];
        const WordClass& wc = classes()[e.cls];
        if (i > 0) {
          for (const auto& [w, tag] : wc.connector) {
            raw += std::string(w) + " ";
            emit(w, tag, false);
          }
        }
        std::string det(wc.det);
        if (i == 0) det[0] = static_cast<char>(std::toupper(det[0]));
        raw += "[/EN#" + e.id + "/" + std::string(wc.type) + " " + det + " " +
               std::string(kAdjectives[e.adj]) + " " + std::string(wc.nouns[e.noun]) + "] ";
        emit(wc.det, "DT", false);
        emit(kAdjectives[e.adj], "JJ", false);
        emit(wc.nouns[e.noun], wc.noun_tag, true);
      }
      const WordClass& last = classes()[entities[order.back()].cls];
      if (!last.trailing.empty()) {
        std::string text;
        for (std::size_t i = 0; i < last.trailing.size(); ++i) {
          const auto& [w, tag] = last.trailing[i];
          text += (i ? " " : "") + std::string(w);
          emit(w, tag, i + 1 == last.trailing.size());
        }
        raw += "[/EN#" + unboxed_id + "/other " + text + "] ";
      }
      raw += ".";
      data.corpus.push_back({image_id, raw, split, data.corpus.size() + 1});
      if (split == "train") data.tagged.push_back(std::move(tagged));
    }
  }
  return data;
}

void write_synthetic(const SyntheticData& data, const SyntheticPaths& paths) {
  write_corpus_file(paths.corpus, data.corpus);
  data.regions.save(paths.regions);
  data.features.save(paths.features);
  if (!paths.tagged.empty()) {
    std::ofstream out(paths.tagged, std::ios::trunc);
    if (!out) throw DataError("cannot write " + paths.tagged);
    write_tagged_corpus(out, data.tagged);
  }
}

}  // namespace regionptr
