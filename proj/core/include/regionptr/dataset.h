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

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "regionptr/bundle.h"
#include "regionptr/decode.h"
#include "regionptr/features.h"
#include "regionptr/metrics.h"
#include "regionptr/model.h"

namespace regionptr {

// Visual inputs of one example.
struct ExampleInputs {
  RegionFeatureVector full_image;
  std::vector<RegionFeatureVector> regions;
};

ExampleInputs example_inputs(const CorpusBundle& bundle, const BundleExample& example,
                             const FeatureStore& store);

// One training sequence per caption of every example in `split`.
std::vector<TrainingExample> training_examples(const CorpusBundle& bundle,
                                               std::string_view split,
                                               const FeatureStore& store);

// Greedy generation for every example in `split`, in bundle order. With
// workers > 1 examples are distributed over threads; output order and
// content do not depend on the worker count.
std::vector<Generation> generate_split(const Captioner& model, const CorpusBundle& bundle,
                                       std::string_view split, const FeatureStore& store,
                                       const GenerateOptions& options,
                                       std::size_t workers = 1);

// One generated caption. File form, one per line:
//   image_id \t region ids (space separated) \t caption \t chunks \t trace
// where chunks are joined by " | " and trace is "trace:<k>", the index of
// the example's block in the trace dump, or "-".
struct CandidateRecord {
  std::string image_id;
  std::vector<std::string> region_ids;
  std::vector<std::string> words;
  std::vector<std::vector<std::string>> chunks;
  std::string trace_ref = "-";
};

std::vector<CandidateRecord> candidate_records(const CorpusBundle& bundle,
                                               std::string_view split,
                                               std::span<const Generation> generations,
                                               bool with_trace);
void write_candidates(std::ostream& out, std::span<const CandidateRecord> records);
std::vector<CandidateRecord> read_candidates(std::istream& in);
std::vector<CandidateRecord> read_candidates(const std::string& path);

// Trace dump: "# trace:<k> image=<id>" then one line per step.
void write_generation_traces(std::ostream& out, const CorpusBundle& bundle,
                             std::string_view split,
                             std::span<const Generation> generations);

// Pairs candidates with the references of `split`, matched on image id and
// region sequence. Throws DataError for a candidate without references.
std::vector<EvalExample> eval_examples(const CorpusBundle& bundle, std::string_view split,
                                       std::span<const CandidateRecord> candidates);

// Every ground-truth caption of `split`, in bundle order.
std::vector<Sentence> reference_captions(const CorpusBundle& bundle, std::string_view split);

}  // namespace regionptr
