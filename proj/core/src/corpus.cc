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

#include "regionptr/corpus.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "regionptr/error.h"
#include "regionptr/text.h"

namespace regionptr {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

constexpr std::string_view kGroupPrefix = "/EN#";

}  // namespace

std::vector<std::string> TrainingSequence::grounded_regions() const {
  std::vector<std::string> out;
  for (const auto& id : region_ids) {
    if (id != kEmptyRegionId) out.push_back(id);
  }
  return out;
}

std::string TrainingSequence::render() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    const std::string& t = tokens[i];
    if (t == token::kBosText) {
      out += "BOS";
    } else if (t == token::kEosText) {
      out += "EOS";
    } else if (t == token::kNextText) {
      out += "NEXT";
    } else {
      out += t;
    }
  }
  return out;
}

AnnotatedCaption parse_annotated_caption(std::string_view raw,
                                         std::string image_id,
                                         const BoxPredicate& has_boxes) {
  AnnotatedCaption caption;
  caption.image_id = std::move(image_id);

  std::string word;
  auto flush = [&] {
    if (!word.empty()) {
      caption.tokens.push_back(std::move(word));
      word.clear();
    }
  };

  bool in_group = false;
  std::size_t group_offset = 0;
  EntitySpan open;

  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == '[') {
      if (in_group) throw ParseError("nested annotation bracket", i);
      flush();
      group_offset = i;
      std::size_t p = i + 1;
      if (raw.substr(p, kGroupPrefix.size()) != kGroupPrefix) {
        throw ParseError("expected '/EN#' after '['", p);
      }
      p += kGroupPrefix.size();
      const std::size_t id_begin = p;
      while (p < raw.size() && raw[p] != '/' && raw[p] != ']' && raw[p] != '[' &&
             !is_space(raw[p])) {
        ++p;
      }
      if (p == id_begin || p >= raw.size() || raw[p] != '/') {
        throw ParseError("malformed entity id", id_begin);
      }
      open = EntitySpan{};
      open.entity_id = std::string(raw.substr(id_begin, p - id_begin));
      ++p;
      const std::size_t type_begin = p;
      while (p < raw.size() && raw[p] != ']' && raw[p] != '[' &&
             !is_space(raw[p])) {
        ++p;
      }
      if (p == type_begin) throw ParseError("missing entity type", type_begin);
      open.entity_type = std::string(raw.substr(type_begin, p - type_begin));
      open.start = caption.tokens.size();
      in_group = true;
      i = p;
      continue;
    }
    if (c == ']') {
      if (!in_group) throw ParseError("unmatched ']'", i);
      flush();
      if (caption.tokens.size() == open.start) {
        throw ParseError("annotation without words", group_offset);
      }
      open.end = caption.tokens.size() - 1;
      open.has_boxes = has_boxes(open.entity_id);
      caption.spans.push_back(std::move(open));
      in_group = false;
      ++i;
      continue;
    }
    if (is_space(c)) {
      flush();
    } else {
      word.push_back(c);
    }
    ++i;
  }
  flush();
  if (in_group) throw ParseError("unclosed annotation bracket", group_offset);
  return caption;
}

AnnotatedCaption parse_annotated_caption(std::string_view raw,
                                         std::string image_id,
                                         const RegionTable& regions) {
  const std::string image = image_id;
  return parse_annotated_caption(
      raw, std::move(image_id), [&](std::string_view entity_id) {
        return regions.has_boxes(image, entity_id);
      });
}

std::vector<std::string> normalize_caption(
    std::span<const std::string> tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    std::string stripped = text::strip_edge_punctuation(t);
    if (!stripped.empty()) out.push_back(text::to_lower(stripped));
  }
  return out;
}

AnnotatedCaption normalize_caption(const AnnotatedCaption& caption) {
  AnnotatedCaption out;
  out.image_id = caption.image_id;
  // new_index[i] = position of token i after normalization, or -1.
  std::vector<long> new_index(caption.tokens.size(), -1);
  for (std::size_t i = 0; i < caption.tokens.size(); ++i) {
    std::string stripped = text::strip_edge_punctuation(caption.tokens[i]);
    if (stripped.empty()) continue;
    new_index[i] = static_cast<long>(out.tokens.size());
    out.tokens.push_back(text::to_lower(stripped));
  }
  for (const auto& span : caption.spans) {
    long first = -1;
    long last = -1;
    for (std::size_t i = span.start; i <= span.end; ++i) {
      if (new_index[i] < 0) continue;
      if (first < 0) first = new_index[i];
      last = new_index[i];
    }
    if (first < 0) continue;
    EntitySpan s = span;
    s.start = static_cast<std::size_t>(first);
    s.end = static_cast<std::size_t>(last);
    out.spans.push_back(std::move(s));
  }
  return out;
}

std::vector<Chunk> chunk_caption(const AnnotatedCaption& caption) {
  std::vector<Chunk> chunks;
  std::size_t pos = 0;
  for (const auto& span : caption.spans) {
    if (!span.has_boxes || span.end < pos) continue;
    Chunk chunk;
    chunk.tokens.assign(caption.tokens.begin() + static_cast<long>(pos),
                        caption.tokens.begin() + static_cast<long>(span.end) + 1);
    chunk.region_ref = span.entity_id;
    chunks.push_back(std::move(chunk));
    pos = span.end + 1;
  }
  if (pos < caption.tokens.size()) {
    Chunk tail;
    tail.tokens.assign(caption.tokens.begin() + static_cast<long>(pos),
                       caption.tokens.end());
    chunks.push_back(std::move(tail));
  }
  return chunks;
}

TrainingSequence inject_next_tokens(std::span<const Chunk> chunks) {
  TrainingSequence seq;
  seq.tokens.emplace_back(token::kBosText);
  for (const auto& chunk : chunks) {
    seq.tokens.insert(seq.tokens.end(), chunk.tokens.begin(),
                      chunk.tokens.end());
    if (chunk.region_ref) {
      seq.tokens.emplace_back(token::kNextText);
      seq.region_ids.push_back(*chunk.region_ref);
    } else {
      seq.region_ids.emplace_back(kEmptyRegionId);
    }
  }
  seq.tokens.emplace_back(token::kEosText);
  return seq;
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> corpus,
                             std::size_t min_count, std::size_t max_words) {
  std::unordered_map<std::string, std::uint64_t> freq;
  std::size_t total = 0;
  for (const auto& caption : corpus) {
    for (const auto& w : caption) {
      ++freq[w];
      ++total;
    }
  }
  if (total == 0) throw DataError("cannot build a vocabulary from an empty corpus");

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [w, n] : freq) {
    if (n >= min_count) kept.emplace_back(w, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (max_words > 0 && kept.size() > max_words) kept.resize(max_words);

  Vocabulary vocab;
  vocab.insert(std::string(token::kBosText), 0);
  vocab.insert(std::string(token::kEosText), 0);
  vocab.insert(std::string(token::kNextText), 0);
  vocab.insert(std::string(token::kUnkText), 0);
  for (auto& [w, n] : kept) vocab.insert(std::move(w), n);
  return vocab;
}

void Vocabulary::insert(std::string word, std::uint64_t count) {
  const auto id = static_cast<TokenId>(words_.size());
  auto [it, inserted] = index_.emplace(word, id);
  if (!inserted) throw DataError("duplicate vocabulary entry '" + word + "'");
  words_.push_back(std::move(word));
  counts_.push_back(count);
}

bool Vocabulary::contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

TokenId Vocabulary::id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? token::kUnk : it->second;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw InvalidArgument("token id " + std::to_string(id) + " out of range");
  }
  return words_[static_cast<std::size_t>(id)];
}

std::vector<TokenId> Vocabulary::encode_words(
    std::span<const std::string> words) const {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto& w : words) ids.push_back(id(w));
  return ids;
}

std::vector<TokenId> Vocabulary::encode(const TrainingSequence& sequence) const {
  return encode_words(sequence.tokens);
}

std::vector<std::string> Vocabulary::decode_words(
    std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  for (TokenId id : ids) {
    if (id == token::kBos || id == token::kEos || id == token::kNext) continue;
    out.push_back(word(id));
  }
  return out;
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    out << words_[i] << '\t' << counts_[i] << '\n';
  }
}

Vocabulary Vocabulary::load(std::istream& in) {
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = text::split(line, '\t');
    std::uint64_t count = 0;
    if (fields.size() != 2 || fields[0].empty()) {
      throw DataError("vocabulary line " + std::to_string(line_no) +
                      ": expected word<TAB>count");
    }
    const char* end = fields[1].data() + fields[1].size();
    auto [ptr, ec] = std::from_chars(fields[1].data(), end, count);
    if (ec != std::errc() || ptr != end) {
      throw DataError("vocabulary line " + std::to_string(line_no) +
                      ": bad count");
    }
    vocab.insert(fields[0], count);
  }
  if (vocab.size() < static_cast<std::size_t>(token::kFirstWordId) ||
      vocab.word(token::kBos) != token::kBosText ||
      vocab.word(token::kEos) != token::kEosText ||
      vocab.word(token::kNext) != token::kNextText ||
      vocab.word(token::kUnk) != token::kUnkText) {
    throw DataError("vocabulary does not start with the reserved tokens");
  }
  return vocab;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write vocabulary " + path);
  save(out);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vocabulary " + path);
  return load(in);
}

std::vector<CorpusRecord> read_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus " + path);
  std::vector<CorpusRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = text::split(line, '\t');
    if (fields.size() != 3 || fields[0].empty() || fields[2].empty()) {
      throw DataError("corpus line " + std::to_string(line_no) +
                      ": expected image_id<TAB>caption<TAB>split");
    }
    records.push_back({std::move(fields[0]), std::move(fields[1]),
                       std::move(fields[2]), line_no});
  }
  return records;
}

void write_corpus_file(const std::string& path,
                       std::span<const CorpusRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus " + path);
  for (const auto& r : records) {
    out << r.image_id << '\t' << r.raw_caption << '\t' << r.split << '\n';
  }
}

}  // namespace regionptr
