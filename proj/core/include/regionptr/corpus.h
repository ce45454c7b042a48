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
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "regionptr/region_table.h"

namespace regionptr {

using TokenId = std::int32_t;

// Reserved vocabulary ids. Word ids start at kFirstWordId.
namespace token {
inline constexpr TokenId kBos = 0;
inline constexpr TokenId kEos = 1;
inline constexpr TokenId kNext = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kFirstWordId = 4;

// Surface forms. Normalized captions never contain '<' or '>' so these
// cannot collide with words.
inline constexpr std::string_view kBosText = "<BOS>";
inline constexpr std::string_view kEosText = "<EOS>";
inline constexpr std::string_view kNextText = "<NEXT>";
inline constexpr std::string_view kUnkText = "<UNK>";
}  // namespace token

// Marker used in region id lists for a chunk with no grounded entity.
inline constexpr std::string_view kEmptyRegionId = "<EMPTY>";

struct EntitySpan {
  std::size_t start = 0;  // inclusive token index
  std::size_t end = 0;    // inclusive token index
  std::string entity_id;
  std::string entity_type;
  bool has_boxes = false;

  bool operator==(const EntitySpan&) const = default;
};

struct AnnotatedCaption {
  std::string image_id;
  std::vector<std::string> tokens;
  std::vector<EntitySpan> spans;  // ordered, non-overlapping
};

struct Chunk {
  std::vector<std::string> tokens;
  std::optional<std::string> region_ref;

  bool operator==(const Chunk&) const = default;
};

// BOS + chunk tokens with NEXT after every grounded chunk + EOS.
struct TrainingSequence {
  std::vector<std::string> tokens;
  // One entry per chunk; kEmptyRegionId for the ungrounded trailing chunk.
  std::vector<std::string> region_ids;

  // Prediction targets: everything after BOS.
  std::size_t target_count() const {
    return tokens.empty() ? 0 : tokens.size() - 1;
  }
  // region_ids without the EMPTY markers; the region sequence the decoder
  // walks through.
  std::vector<std::string> grounded_regions() const;
  // "BOS a child NEXT ... EOS" with bare special names.
  std::string render() const;
};

using BoxPredicate = std::function<bool(std::string_view entity_id)>;

// Parses the `[/EN#<id>/<type> <words>]` annotation grammar. Markup is
// removed from the tokens; one span per bracket group. Throws ParseError
// with the byte offset for nested, unbalanced or empty groups.
AnnotatedCaption parse_annotated_caption(std::string_view raw,
                                         std::string image_id,
                                         const BoxPredicate& has_boxes);
AnnotatedCaption parse_annotated_caption(std::string_view raw,
                                         std::string image_id,
                                         const RegionTable& regions);

// Lower-cases, strips punctuation at token edges and drops tokens that
// become empty.
std::vector<std::string> normalize_caption(
    std::span<const std::string> tokens);

// Same as above, remapping spans onto the surviving tokens. Spans whose
// tokens are all removed are dropped.
AnnotatedCaption normalize_caption(const AnnotatedCaption& caption);

// Each chunk ends at the last token of the next grounded span; trailing
// tokens after the last grounded span form a chunk without a region.
std::vector<Chunk> chunk_caption(const AnnotatedCaption& caption);

TrainingSequence inject_next_tokens(std::span<const Chunk> chunks);

// Word vocabulary with the four reserved tokens first.
//
// File format: one "token<TAB>count" line per id, in id order.
class Vocabulary {
 public:
  // Words with frequency >= min_count, ordered by frequency descending then
  // lexicographically. `max_words` > 0 keeps only the first max_words.
  // Throws DataError on an empty corpus.
  static Vocabulary build(std::span<const std::vector<std::string>> corpus,
                          std::size_t min_count = 5,
                          std::size_t max_words = 0);

  std::size_t size() const { return words_.size(); }
  bool contains(std::string_view word) const;
  // kUnk for unknown words.
  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const;
  std::uint64_t count(TokenId id) const { return counts_.at(id); }

  std::vector<TokenId> encode_words(std::span<const std::string> words) const;
  // Maps the special surface forms onto reserved ids.
  std::vector<TokenId> encode(const TrainingSequence& sequence) const;
  // Drops BOS/NEXT/EOS; keeps <UNK> spelled out.
  std::vector<std::string> decode_words(std::span<const TokenId> ids) const;

  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in);
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && counts_ == other.counts_;
  }

 private:
  void insert(std::string word, std::uint64_t count);

  std::vector<std::string> words_;
  std::vector<std::uint64_t> counts_;
  std::unordered_map<std::string, TokenId> index_;
};

// One line of a corpus file: image_id<TAB>raw_caption<TAB>split.
struct CorpusRecord {
  std::string image_id;
  std::string raw_caption;
  std::string split;
  std::size_t line = 0;
};

std::vector<CorpusRecord> read_corpus_file(const std::string& path);
void write_corpus_file(const std::string& path,
                       std::span<const CorpusRecord> records);

}  // namespace regionptr
