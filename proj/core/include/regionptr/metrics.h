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

#include <array>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "regionptr/corpus.h"
#include "regionptr/model.h"

namespace regionptr {

using Sentence = std::vector<std::string>;

// A candidate caption scored against the references sharing its image and
// ordered region sequence.
struct EvalExample {
  std::string image_id;
  std::vector<std::string> region_ids;
  Sentence candidate;
  std::vector<Sentence> references;
};

// ---------------------------------------------------------------------------
// NEXT-token agreement under teacher guidance.

struct NextCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;

  // Percentages; nullopt when the denominator is zero.
  std::optional<double> precision() const;
  std::optional<double> recall() const;
};

// Step-aligned comparison of predicted and ground-truth tokens.
NextCounts count_next_agreement(std::span<const TokenId> predicted,
                                std::span<const TokenId> truth);

struct NextAgreement {
  NextCounts raw;        // argmax as produced
  NextCounts rewritten;  // EOS predicted with regions left counts as NEXT
};

// Feeds the ground-truth previous token at every step and advances the
// region pointer on ground-truth NEXT tokens only. Predictions are argmax
// with UNK and BOS suppressed.
NextAgreement next_agreement(const Captioner& model,
                             std::span<const TrainingExample> examples,
                             bool ablation = false);

// ---------------------------------------------------------------------------
// n-gram metrics. Scores are in [0, 1] (CIDEr-D is unbounded above).

// Corpus BLEU-1..4: clipped n-gram counts summed over the corpus, geometric
// mean of the precisions up to n, brevity penalty against the closest
// reference length (shorter one on ties). A zero precision gives zero.
std::array<double, 4> bleu(std::span<const EvalExample> corpus);

std::size_t lcs_length(const Sentence& a, const Sentence& b);

// LCS F-measure against each reference, maximum over references.
double rouge_l_sentence(const Sentence& candidate,
                        std::span<const Sentence> references,
                        double beta = 1.2);
// Mean of rouge_l_sentence over the corpus.
double rouge_l(std::span<const EvalExample> corpus, double beta = 1.2);

// CIDEr-D: TF-IDF vectors over 1..4-grams with document frequencies from
// the reference sets, clipped cosine per n times exp(-delta^2 / 2 sigma^2)
// where delta is the difference in bigram counts, averaged over n and
// references, times 10. IDF is degenerate (all zero) when the corpus holds
// a single example.
std::vector<double> cider_d_per_example(std::span<const EvalExample> corpus,
                                        double sigma = 6.0);
double cider_d(std::span<const EvalExample> corpus, double sigma = 6.0);

// ---------------------------------------------------------------------------
// Diversity statistics.

struct DiversityStats {
  double diversity = 0;  // % distinct candidates
  double novelty = 0;    // % candidates not in the training set
  std::size_t vocabulary = 0;
  double mean_length = 0;
};

// `training_captions` holds space-joined normalized captions. Throws
// InvalidArgument for an empty candidate list.
DiversityStats diversity_stats(std::span<const Sentence> candidates,
                               const std::set<std::string>& training_captions);

// ---------------------------------------------------------------------------
// PoS end-of-chunk statistics over a pre-tagged corpus.

struct TaggedToken {
  std::string word;
  std::string tag;
  bool chunk_final = false;
};
using TaggedCaption = std::vector<TaggedToken>;

// One caption per line; tokens "word/TAG" separated by spaces, a lone "|"
// after each chunk-final token. Throws DataError with the line number for
// an untagged token.
std::vector<TaggedCaption> read_tagged_corpus(std::istream& in);
void write_tagged_corpus(std::ostream& out,
                         std::span<const TaggedCaption> corpus);

struct TagStats {
  std::string tag;
  std::size_t occurrences = 0;
  std::size_t chunk_final = 0;
  double ppv = 0;  // % of occurrences that end a chunk
};

// Sorted by chunk-final count descending, then tag. Throws DataError for a
// token with an empty tag.
std::vector<TagStats> pos_chunk_stats(std::span<const TaggedCaption> corpus);

// ---------------------------------------------------------------------------
// Reporting.

struct MeanInterval {
  double mean = 0;
  std::optional<double> half_width;  // needs at least two values
};

// Student-t interval of the mean at the given two-sided confidence.
MeanInterval t_interval(std::span<const double> values,
                        double confidence = 0.95);

struct EvalReport {
  std::array<double, 4> bleu{};
  double rouge_l = 0;
  double cider = 0;
  DiversityStats diversity;
  std::size_t examples = 0;
  std::optional<NextAgreement> next;
};

EvalReport evaluate(std::span<const EvalExample> corpus,
                    const std::set<std::string>& training_captions);

// Two tables: n-gram metrics (x100, B-1..B-4, R-L, C) and diversity
// statistics (Diversity %, Novelty %, Vocab, Length), then NEXT agreement
// when present.
void write_report(std::ostream& out, const EvalReport& report,
                  const std::string& label);
// Mean +/- 95% interval across runs.
void write_multi_run_report(std::ostream& out,
                            std::span<const EvalReport> runs,
                            const std::string& label);

}  // namespace regionptr
