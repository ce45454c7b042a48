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

#include "regionptr/metrics.h"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "regionptr/decode.h"
#include "regionptr/error.h"
#include "regionptr/text.h"

namespace regionptr {
namespace {

constexpr std::size_t kMaxN = 4;

// n-grams are keyed by their words joined with a unit separator, which
// never occurs inside a normalized word.
using NgramCounts = std::unordered_map<std::string, double>;

std::string ngram_key(const Sentence& s, std::size_t begin, std::size_t n) {
  std::string key;
  for (std::size_t i = begin; i < begin + n; ++i) {
    if (i > begin) key.push_back('\x1f');
    key += s[i];
  }
  return key;
}

NgramCounts count_ngrams(const Sentence& s, std::size_t n) {
  NgramCounts counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) counts[ngram_key(s, i, n)] += 1;
  return counts;
}

std::string percent(std::optional<double> v) {
  if (!v) return "undefined";
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << *v;
  return out.str();
}

}  // namespace

std::optional<double> NextCounts::precision() const {
  const std::size_t d = true_positive + false_positive;
  if (d == 0) return std::nullopt;
  return 100.0 * static_cast<double>(true_positive) / static_cast<double>(d);
}

std::optional<double> NextCounts::recall() const {
  const std::size_t d = true_positive + false_negative;
  if (d == 0) return std::nullopt;
  return 100.0 * static_cast<double>(true_positive) / static_cast<double>(d);
}

NextCounts count_next_agreement(std::span<const TokenId> predicted,
                                std::span<const TokenId> truth) {
  if (predicted.size() != truth.size()) {
    throw InvalidArgument("prediction and ground truth differ in length");
  }
  NextCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == token::kNext;
    const bool t = truth[i] == token::kNext;
    if (p && t) ++c.true_positive;
    if (p && !t) ++c.false_positive;
    if (!p && t) ++c.false_negative;
  }
  return c;
}

NextAgreement next_agreement(const Captioner& model,
                             std::span<const TrainingExample> examples,
                             bool ablation) {
  const std::array<TokenId, 2> suppressed = {token::kUnk, token::kBos};
  const std::size_t D = model.config().appearance_dim;
  NextAgreement result;
  for (const auto& ex : examples) {
    validate_example(ex, model.config());
    std::vector<TokenId> raw;
    std::vector<TokenId> rewritten;
    std::vector<TokenId> truth;
    nn::LstmState state = model.init_state(ex.full_image);
    std::size_t pointer = 0;
    for (std::size_t t = 1; t < ex.tokens.size(); ++t) {
      const TokenId input = ex.tokens[t - 1];
      if (t > 1 && input == token::kNext) {
        pointer = std::min(pointer + 1, ex.regions.size());
      }
      Captioner::Step out =
          model.forward_step(state, input, teacher_region(ex, pointer, ablation, D));
      const TokenId predicted = sample_argmax(out.logits, suppressed);
      raw.push_back(predicted);
      const bool regions_left = pointer < ex.regions.size();
      rewritten.push_back(predicted == token::kEos && regions_left ? token::kNext
                                                                   : predicted);
      truth.push_back(ex.tokens[t]);
      state = std::move(out.state);
    }
    const NextCounts a = count_next_agreement(raw, truth);
    const NextCounts b = count_next_agreement(rewritten, truth);
    result.raw.true_positive += a.true_positive;
    result.raw.false_positive += a.false_positive;
    result.raw.false_negative += a.false_negative;
    result.rewritten.true_positive += b.true_positive;
    result.rewritten.false_positive += b.false_positive;
    result.rewritten.false_negative += b.false_negative;
  }
  return result;
}

std::array<double, 4> bleu(std::span<const EvalExample> corpus) {
  std::array<double, kMaxN> matched{};
  std::array<double, kMaxN> total{};
  double cand_len = 0;
  double ref_len = 0;
  for (const auto& ex : corpus) {
    if (ex.references.empty()) {
      throw InvalidArgument("example " + ex.image_id + " has no references");
    }
    const Sentence& c = ex.candidate;
    for (std::size_t n = 1; n <= kMaxN; ++n) {
      const NgramCounts cand = count_ngrams(c, n);
      NgramCounts max_ref;
      for (const auto& r : ex.references) {
        for (const auto& [g, k] : count_ngrams(r, n)) {
          max_ref[g] = std::max(max_ref[g], k);
        }
      }
      for (const auto& [g, k] : cand) {
        auto it = max_ref.find(g);
        if (it != max_ref.end()) matched[n - 1] += std::min(k, it->second);
      }
      if (c.size() >= n) total[n - 1] += static_cast<double>(c.size() - n + 1);
    }
    // Closest reference length, shorter on ties.
    std::size_t best = ex.references[0].size();
    for (const auto& r : ex.references) {
      const auto diff = [&](std::size_t len) {
        return len > c.size() ? len - c.size() : c.size() - len;
      };
      if (diff(r.size()) < diff(best) ||
          (diff(r.size()) == diff(best) && r.size() < best)) {
        best = r.size();
      }
    }
    cand_len += static_cast<double>(c.size());
    ref_len += static_cast<double>(best);
  }

  std::array<double, kMaxN> scores{};
  if (cand_len == 0) return scores;
  const double bp = cand_len > ref_len ? 1.0 : std::exp(1.0 - ref_len / cand_len);
  double log_sum = 0;
  bool zero = false;
  for (std::size_t n = 0; n < kMaxN; ++n) {
    if (matched[n] == 0 || total[n] == 0) zero = true;
    if (!zero) log_sum += std::log(matched[n] / total[n]);
    scores[n] = zero ? 0.0 : bp * std::exp(log_sum / static_cast<double>(n + 1));
  }
  return scores;
}

std::size_t lcs_length(const Sentence& a, const Sentence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_sentence(const Sentence& candidate,
                        std::span<const Sentence> references, double beta) {
  double best = 0;
  for (const auto& r : references) {
    const std::size_t lcs = lcs_length(candidate, r);
    if (lcs == 0) continue;
    const double p = static_cast<double>(lcs) / static_cast<double>(candidate.size());
    const double rec = static_cast<double>(lcs) / static_cast<double>(r.size());
    const double b2 = beta * beta;
    best = std::max(best, (1 + b2) * p * rec / (rec + b2 * p));
  }
  return best;
}

double rouge_l(std::span<const EvalExample> corpus, double beta) {
  if (corpus.empty()) return 0;
  double sum = 0;
  for (const auto& ex : corpus) sum += rouge_l_sentence(ex.candidate, ex.references, beta);
  return sum / static_cast<double>(corpus.size());
}

std::vector<double> cider_d_per_example(std::span<const EvalExample> corpus,
                                        double sigma) {
  struct Vec {
    std::array<NgramCounts, kMaxN> tfidf;
    std::array<double, kMaxN> norm_sq{};
    double length = 0;  // bigram count
  };

  // Document frequency: number of examples whose reference set contains
  // the n-gram.
  std::unordered_map<std::string, double> df;
  std::vector<std::vector<std::array<NgramCounts, kMaxN>>> ref_counts;
  for (const auto& ex : corpus) {
    std::vector<std::array<NgramCounts, kMaxN>> refs;
    std::set<std::string> seen;
    for (const auto& r : ex.references) {
      std::array<NgramCounts, kMaxN> counts;
      for (std::size_t n = 1; n <= kMaxN; ++n) {
        counts[n - 1] = count_ngrams(r, n);
        for (const auto& [g, k] : counts[n - 1]) seen.insert(g);
      }
      refs.push_back(std::move(counts));
    }
    for (const auto& g : seen) df[g] += 1;
    ref_counts.push_back(std::move(refs));
  }
  const double log_n = std::log(static_cast<double>(corpus.size()));

  auto to_vec = [&](const std::array<NgramCounts, kMaxN>& counts) {
    Vec v;
    for (std::size_t n = 0; n < kMaxN; ++n) {
      for (const auto& [g, tf] : counts[n]) {
        auto it = df.find(g);
        const double d = it == df.end() ? 1.0 : std::max(1.0, it->second);
        const double w = tf * (log_n - std::log(d));
        v.tfidf[n][g] = w;
        v.norm_sq[n] += w * w;
        if (n == 1) v.length += tf;
      }
    }
    return v;
  };

  std::vector<double> scores;
  scores.reserve(corpus.size());
  for (std::size_t e = 0; e < corpus.size(); ++e) {
    const auto& ex = corpus[e];
    if (ex.references.empty()) {
      throw InvalidArgument("example " + ex.image_id + " has no references");
    }
    std::array<NgramCounts, kMaxN> cand_counts;
    for (std::size_t n = 1; n <= kMaxN; ++n) {
      cand_counts[n - 1] = count_ngrams(ex.candidate, n);
    }
    const Vec hyp = to_vec(cand_counts);
    double total = 0;
    for (const auto& rc : ref_counts[e]) {
      const Vec ref = to_vec(rc);
      const double delta = hyp.length - ref.length;
      const double penalty = std::exp(-(delta * delta) / (2.0 * sigma * sigma));
      double sum_n = 0;
      for (std::size_t n = 0; n < kMaxN; ++n) {
        double dot = 0;
        for (const auto& [g, h] : hyp.tfidf[n]) {
          auto it = ref.tfidf[n].find(g);
          if (it != ref.tfidf[n].end()) dot += std::min(h, it->second) * it->second;
        }
        if (hyp.norm_sq[n] != 0 && ref.norm_sq[n] != 0) {
          dot /= std::sqrt(hyp.norm_sq[n] * ref.norm_sq[n]);
        }
        sum_n += dot * penalty;
      }
      total += sum_n / static_cast<double>(kMaxN);
    }
    scores.push_back(10.0 * total / static_cast<double>(ex.references.size()));
  }
  return scores;
}

double cider_d(std::span<const EvalExample> corpus, double sigma) {
  if (corpus.empty()) return 0;
  const std::vector<double> per = cider_d_per_example(corpus, sigma);
  double sum = 0;
  for (double s : per) sum += s;
  return sum / static_cast<double>(per.size());
}

DiversityStats diversity_stats(std::span<const Sentence> candidates,
                               const std::set<std::string>& training_captions) {
  if (candidates.empty()) {
    throw InvalidArgument("diversity_stats needs at least one candidate");
  }
  std::set<std::string> distinct;
  std::set<std::string> words;
  std::size_t novel = 0;
  std::size_t word_count = 0;
  for (const auto& c : candidates) {
    const std::string joined = text::join(c);
    distinct.insert(joined);
    if (training_captions.count(joined) == 0) ++novel;
    words.insert(c.begin(), c.end());
    word_count += c.size();
  }
  const auto n = static_cast<double>(candidates.size());
  DiversityStats s;
  s.diversity = 100.0 * static_cast<double>(distinct.size()) / n;
  s.novelty = 100.0 * static_cast<double>(novel) / n;
  s.vocabulary = words.size();
  s.mean_length = static_cast<double>(word_count) / n;
  return s;
}

std::vector<TaggedCaption> read_tagged_corpus(std::istream& in) {
  std::vector<TaggedCaption> corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    TaggedCaption caption;
    for (const auto& field : text::split_whitespace(line)) {
      if (field == "|") {
        if (caption.empty()) {
          throw DataError("tagged corpus line " + std::to_string(line_no) +
                          ": chunk marker before any token");
        }
        caption.back().chunk_final = true;
        continue;
      }
      const auto slash = field.rfind('/');
      if (slash == std::string::npos || slash == 0 || slash + 1 == field.size()) {
        throw DataError("tagged corpus line " + std::to_string(line_no) +
                        ": untagged token '" + field + "'");
      }
      caption.push_back({field.substr(0, slash), field.substr(slash + 1), false});
    }
    corpus.push_back(std::move(caption));
  }
  return corpus;
}

void write_tagged_corpus(std::ostream& out,
                         std::span<const TaggedCaption> corpus) {
  for (const auto& caption : corpus) {
    for (std::size_t i = 0; i < caption.size(); ++i) {
      if (i) out << ' ';
      out << caption[i].word << '/' << caption[i].tag;
      if (caption[i].chunk_final) out << " |";
    }
    out << '\n';
  }
}

std::vector<TagStats> pos_chunk_stats(std::span<const TaggedCaption> corpus) {
  std::map<std::string, TagStats> by_tag;
  for (const auto& caption : corpus) {
    for (const auto& tok : caption) {
      if (tok.tag.empty()) {
        throw DataError("untagged token '" + tok.word + "'");
      }
      TagStats& s = by_tag[tok.tag];
      s.tag = tok.tag;
      ++s.occurrences;
      if (tok.chunk_final) ++s.chunk_final;
    }
  }
  std::vector<TagStats> out;
  for (auto& [tag, s] : by_tag) {
    s.ppv = 100.0 * static_cast<double>(s.chunk_final) /
            static_cast<double>(s.occurrences);
    out.push_back(s);
  }
  std::stable_sort(out.begin(), out.end(), [](const TagStats& a, const TagStats& b) {
    return a.chunk_final > b.chunk_final;
  });
  return out;
}

MeanInterval t_interval(std::span<const double> values, double confidence) {
  MeanInterval r;
  if (values.empty()) return r;
  double sum = 0;
  for (double v : values) sum += v;
  const auto n = static_cast<double>(values.size());
  r.mean = sum / n;
  if (values.size() < 2) return r;
  double ss = 0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  const double sd = std::sqrt(ss / (n - 1));
  boost::math::students_t dist(n - 1);
  const double t = boost::math::quantile(dist, 0.5 + confidence / 2.0);
  r.half_width = t * sd / std::sqrt(n);
  return r;
}

EvalReport evaluate(std::span<const EvalExample> corpus,
                    const std::set<std::string>& training_captions) {
  EvalReport report;
  report.examples = corpus.size();
  report.bleu = bleu(corpus);
  report.rouge_l = rouge_l(corpus);
  report.cider = cider_d(corpus);
  std::vector<Sentence> candidates;
  for (const auto& ex : corpus) candidates.push_back(ex.candidate);
  report.diversity = diversity_stats(candidates, training_captions);
  return report;
}

namespace {

void write_next(std::ostream& out, const NextAgreement& next,
                const std::string& indent) {
  out << indent << "NEXT agreement (teacher-guided, raw argmax): precision "
      << percent(next.raw.precision()) << "%, recall "
      << percent(next.raw.recall()) << "%\n";
  out << indent << "NEXT agreement (teacher-guided, EOS-as-NEXT):  precision "
      << percent(next.rewritten.precision()) << "%, recall "
      << percent(next.rewritten.recall()) << "%\n";
}

}  // namespace

void write_report(std::ostream& out, const EvalReport& r,
                  const std::string& label) {
  out << std::fixed << std::setprecision(2);
  out << "examples: " << r.examples << '\n';
  out << std::left << std::setw(24) << "Model" << std::right << std::setw(8)
      << "B-1" << std::setw(8) << "B-2" << std::setw(8) << "B-3" << std::setw(8)
      << "B-4" << std::setw(8) << "R-L" << std::setw(8) << "C" << '\n';
  out << std::left << std::setw(24) << label << std::right;
  for (double b : r.bleu) out << std::setw(8) << 100.0 * b;
  out << std::setw(8) << 100.0 * r.rouge_l << std::setw(8) << 100.0 * r.cider
      << "\n\n";
  out << std::left << std::setw(24) << "Model" << std::right << std::setw(12)
      << "Diversity%" << std::setw(12) << "Novelty%" << std::setw(8) << "Vocab"
      << std::setw(8) << "Length" << '\n';
  out << std::left << std::setw(24) << label << std::right << std::setw(12)
      << r.diversity.diversity << std::setw(12) << r.diversity.novelty
      << std::setw(8) << r.diversity.vocabulary << std::setw(8)
      << std::setprecision(1) << r.diversity.mean_length << std::setprecision(2)
      << '\n';
  if (r.next) {
    out << '\n';
    write_next(out, *r.next, "");
  }
  out.unsetf(std::ios::floatfield);
}

void write_multi_run_report(std::ostream& out, std::span<const EvalReport> runs,
                            const std::string& label) {
  if (runs.empty()) return;
  auto column = [&](auto get) {
    std::vector<double> v;
    for (const auto& r : runs) v.push_back(get(r));
    return t_interval(v);
  };
  auto cell = [&](const MeanInterval& m) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << m.mean;
    if (m.half_width) s << " +/- " << *m.half_width;
    return s.str();
  };
  out << "runs: " << runs.size() << " (mean +/- 95% t-interval)\n";
  const std::vector<std::pair<std::string, MeanInterval>> cols = {
      {"B-1", column([](const EvalReport& r) { return 100.0 * r.bleu[0]; })},
      {"B-2", column([](const EvalReport& r) { return 100.0 * r.bleu[1]; })},
      {"B-3", column([](const EvalReport& r) { return 100.0 * r.bleu[2]; })},
      {"B-4", column([](const EvalReport& r) { return 100.0 * r.bleu[3]; })},
      {"R-L", column([](const EvalReport& r) { return 100.0 * r.rouge_l; })},
      {"C", column([](const EvalReport& r) { return 100.0 * r.cider; })},
      {"Diversity%", column([](const EvalReport& r) { return r.diversity.diversity; })},
      {"Novelty%", column([](const EvalReport& r) { return r.diversity.novelty; })},
      {"Vocab", column([](const EvalReport& r) {
         return static_cast<double>(r.diversity.vocabulary);
       })},
      {"Length", column([](const EvalReport& r) { return r.diversity.mean_length; })},
  };
  out << label << '\n';
  for (const auto& [name, m] : cols) {
    out << "  " << std::left << std::setw(12) << name << std::right << cell(m)
        << '\n';
  }
}

}  // namespace regionptr
