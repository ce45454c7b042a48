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

#include "regionptr/bundle.h"

#include <fstream>
#include <map>
#include <sstream>

#include "regionptr/binary_io.h"
#include "regionptr/error.h"
#include "regionptr/text.h"

namespace regionptr {
namespace {

constexpr std::string_view kMagic = "RPCB";
constexpr std::uint32_t kVersion = 1;

void write_strings(std::ostream& out, const std::vector<std::string>& v) {
  io::write_u32(out, static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v) io::write_string(out, s);
}

std::vector<std::string> read_strings(std::istream& in) {
  const std::uint32_t n = io::read_u32(in);
  std::vector<std::string> v;
  v.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) v.push_back(io::read_string(in));
  return v;
}

}  // namespace

std::vector<const BundleExample*> CorpusBundle::split(std::string_view name) const {
  std::vector<const BundleExample*> out;
  for (const auto& ex : examples) {
    if (ex.split == name) out.push_back(&ex);
  }
  return out;
}

std::size_t CorpusBundle::split_size(std::string_view name) const {
  std::size_t n = 0;
  for (const auto& ex : examples) n += ex.split == name ? 1 : 0;
  return n;
}

std::set<std::string> CorpusBundle::training_captions() const {
  std::set<std::string> out;
  for (const auto& ex : examples) {
    if (ex.split != "train") continue;
    for (const auto& c : ex.captions) out.insert(text::join(c.words));
  }
  return out;
}

void CorpusBundle::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write bundle " + path);
  io::write_magic(out, kMagic);
  io::write_u32(out, kVersion);
  std::ostringstream vocab_text;
  vocab.save(vocab_text);
  io::write_string(out, vocab_text.str());

  io::write_u64(out, regions.size());
  for (const auto& [key, e] : regions.entries()) {
    io::write_string(out, e.image_id);
    io::write_string(out, e.entity_id);
    io::write_f64(out, e.image_width);
    io::write_f64(out, e.image_height);
    io::write_u32(out, static_cast<std::uint32_t>(e.boxes.size()));
    for (const auto& b : e.boxes) {
      io::write_f64(out, b.x_min);
      io::write_f64(out, b.y_min);
      io::write_f64(out, b.x_max);
      io::write_f64(out, b.y_max);
    }
  }

  io::write_u64(out, examples.size());
  for (const auto& ex : examples) {
    io::write_string(out, ex.split);
    io::write_string(out, ex.image_id);
    write_strings(out, ex.region_ids);
    io::write_u32(out, static_cast<std::uint32_t>(ex.captions.size()));
    for (const auto& c : ex.captions) {
      write_strings(out, c.words);
      write_strings(out, c.sequence.tokens);
      write_strings(out, c.sequence.region_ids);
      io::write_u32(out, static_cast<std::uint32_t>(c.token_ids.size()));
      for (TokenId id : c.token_ids) io::write_u32(out, static_cast<std::uint32_t>(id));
    }
  }
  if (!out) throw DataError("failed writing bundle " + path);
}

CorpusBundle CorpusBundle::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open bundle " + path);
  io::expect_magic(in, kMagic, "corpus bundle");
  const std::uint32_t version = io::read_u32(in);
  if (version != kVersion) {
    throw DataError("unsupported bundle version " + std::to_string(version));
  }
  CorpusBundle b;
  std::istringstream vocab_text(io::read_string(in));
  b.vocab = Vocabulary::load(vocab_text);

  const std::uint64_t region_count = io::read_u64(in);
  for (std::uint64_t i = 0; i < region_count; ++i) {
    RegionEntry e;
    e.image_id = io::read_string(in);
    e.entity_id = io::read_string(in);
    e.image_width = io::read_f64(in);
    e.image_height = io::read_f64(in);
    const std::uint32_t boxes = io::read_u32(in);
    for (std::uint32_t k = 0; k < boxes; ++k) {
      BoundingBox box;
      box.x_min = io::read_f64(in);
      box.y_min = io::read_f64(in);
      box.x_max = io::read_f64(in);
      box.y_max = io::read_f64(in);
      e.boxes.push_back(box);
    }
    b.regions.add(std::move(e));
  }

  const std::uint64_t example_count = io::read_u64(in);
  for (std::uint64_t i = 0; i < example_count; ++i) {
    BundleExample ex;
    ex.split = io::read_string(in);
    ex.image_id = io::read_string(in);
    ex.region_ids = read_strings(in);
    const std::uint32_t captions = io::read_u32(in);
    for (std::uint32_t k = 0; k < captions; ++k) {
      BundleCaption c;
      c.words = read_strings(in);
      c.sequence.tokens = read_strings(in);
      c.sequence.region_ids = read_strings(in);
      const std::uint32_t n = io::read_u32(in);
      for (std::uint32_t j = 0; j < n; ++j) {
        const auto id = static_cast<TokenId>(io::read_u32(in));
        if (id < 0 || static_cast<std::size_t>(id) >= b.vocab.size()) {
          throw DataError("bundle token id out of range");
        }
        c.token_ids.push_back(id);
      }
      ex.captions.push_back(std::move(c));
    }
    b.examples.push_back(std::move(ex));
  }
  return b;
}

CorpusBundle build_bundle(std::span<const CorpusRecord> records,
                          RegionTable regions, const IngestOptions& options) {
  struct Parsed {
    const CorpusRecord* record;
    std::vector<std::string> words;
    TrainingSequence sequence;
  };
  std::vector<Parsed> parsed;
  parsed.reserve(records.size());
  for (const auto& r : records) {
    try {
      const AnnotatedCaption caption =
          normalize_caption(parse_annotated_caption(r.raw_caption, r.image_id, regions));
      if (caption.tokens.empty()) throw DataError("caption is empty after normalization");
      const auto chunks = chunk_caption(caption);
      parsed.push_back({&r, caption.tokens, inject_next_tokens(chunks)});
    } catch (const DataError& e) {
      throw DataError("corpus line " + std::to_string(r.line) + ": " + e.what());
    }
  }

  std::vector<std::vector<std::string>> train_words;
  for (const auto& p : parsed) {
    if (p.record->split == "train") train_words.push_back(p.words);
  }
  if (train_words.empty()) throw DataError("corpus has no 'train' records");

  CorpusBundle bundle;
  bundle.vocab = Vocabulary::build(train_words, options.min_count, options.vocab_cap);

  std::map<std::tuple<std::string, std::string, std::vector<std::string>>, std::size_t>
      index;
  for (auto& p : parsed) {
    std::vector<std::string> region_ids = p.sequence.grounded_regions();
    auto key = std::make_tuple(p.record->split, p.record->image_id, region_ids);
    auto [it, inserted] = index.emplace(key, bundle.examples.size());
    if (inserted) {
      BundleExample ex;
      ex.split = p.record->split;
      ex.image_id = p.record->image_id;
      ex.region_ids = std::move(region_ids);
      bundle.examples.push_back(std::move(ex));
    }
    BundleCaption c;
    c.token_ids = bundle.vocab.encode(p.sequence);
    c.words = std::move(p.words);
    c.sequence = std::move(p.sequence);
    bundle.examples[it->second].captions.push_back(std::move(c));
  }
  bundle.regions = std::move(regions);
  return bundle;
}

}  // namespace regionptr
