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

#include "regionptr/dataset.h"

#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <thread>

#include "regionptr/error.h"
#include "regionptr/text.h"

namespace regionptr {

ExampleInputs example_inputs(const CorpusBundle& bundle, const BundleExample& example,
                             const FeatureStore& store) {
  ExampleInputs in{full_image_features(store, example.image_id), {}};
  in.regions.reserve(example.region_ids.size());
  for (const auto& id : example.region_ids) {
    in.regions.push_back(region_features(store, bundle.regions, example.image_id, id));
  }
  return in;
}

std::vector<TrainingExample> training_examples(const CorpusBundle& bundle,
                                               std::string_view split,
                                               const FeatureStore& store) {
  std::vector<TrainingExample> out;
  for (const BundleExample* ex : bundle.split(split)) {
    const ExampleInputs in = example_inputs(bundle, *ex, store);
    for (const auto& c : ex->captions) {
      out.push_back({c.token_ids, in.regions, in.full_image});
    }
  }
  return out;
}

std::vector<Generation> generate_split(const Captioner& model, const CorpusBundle& bundle,
                                       std::string_view split, const FeatureStore& store,
                                       const GenerateOptions& options,
                                       std::size_t workers) {
  const auto examples = bundle.split(split);
  std::vector<ExampleInputs> inputs;
  inputs.reserve(examples.size());
  for (const BundleExample* ex : examples) inputs.push_back(example_inputs(bundle, *ex, store));

  std::vector<Generation> out(examples.size());
  auto run = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < inputs.size(); i += stride) {
      out[i] = generate(model, inputs[i].full_image, inputs[i].regions, options);
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, inputs.size()));
  if (workers == 1) {
    run(0, 1);
    return out;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        run(w, workers);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<CandidateRecord> candidate_records(const CorpusBundle& bundle,
                                               std::string_view split,
                                               std::span<const Generation> generations,
                                               bool with_trace) {
  const auto examples = bundle.split(split);
  if (examples.size() != generations.size()) {
    throw InvalidArgument("generation count does not match the split");
  }
  std::vector<CandidateRecord> out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    CandidateRecord r;
    r.image_id = examples[i]->image_id;
    r.region_ids = examples[i]->region_ids;
    r.words = bundle.vocab.decode_words(generations[i].words());
    for (const auto& chunk : generations[i].chunks) {
      r.chunks.push_back(bundle.vocab.decode_words(chunk));
    }
    if (with_trace) r.trace_ref = "trace:" + std::to_string(i);
    out.push_back(std::move(r));
  }
  return out;
}

void write_candidates(std::ostream& out, std::span<const CandidateRecord> records) {
  for (const auto& r : records) {
    std::vector<std::string> chunks;
    for (const auto& c : r.chunks) chunks.push_back(text::join(c));
    out << r.image_id << '\t' << text::join(r.region_ids) << '\t' << text::join(r.words)
        << '\t' << text::join(chunks, " | ") << '\t' << r.trace_ref << '\n';
  }
}

std::vector<CandidateRecord> read_candidates(std::istream& in) {
  std::vector<CandidateRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() < 3) {
      throw DataError("candidate line " + std::to_string(line_no) +
                      ": expected at least 3 tab-separated fields");
    }
    CandidateRecord r;
    r.image_id = fields[0];
    r.region_ids = text::split_whitespace(fields[1]);
    r.words = text::split_whitespace(fields[2]);
    if (fields.size() > 3) {
      for (const auto& c : text::split(fields[3], '|')) {
        r.chunks.push_back(text::split_whitespace(c));
      }
    }
    if (fields.size() > 4) r.trace_ref = fields[4];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CandidateRecord> read_candidates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open candidate file " + path);
  try {
    return read_candidates(in);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_generation_traces(std::ostream& out, const CorpusBundle& bundle,
                             std::string_view split,
                             std::span<const Generation> generations) {
  const auto examples = bundle.split(split);
  for (std::size_t i = 0; i < generations.size() && i < examples.size(); ++i) {
    out << "# trace:" << i << " image=" << examples[i]->image_id
        << " natural_end=" << (generations[i].natural_end ? 1 : 0)
        << " undescribed=" << generations[i].undescribed << '\n';
    std::vector<TraceRecord> steps;
    for (const auto& d : generations[i].trace) steps.push_back(d.step);
    write_trace(out, steps, &bundle.vocab);
  }
}

std::vector<EvalExample> eval_examples(const CorpusBundle& bundle, std::string_view split,
                                       std::span<const CandidateRecord> candidates) {
  std::map<std::pair<std::string, std::vector<std::string>>, const BundleExample*> index;
  for (const BundleExample* ex : bundle.split(split)) {
    index.emplace(std::make_pair(ex->image_id, ex->region_ids), ex);
  }
  std::vector<EvalExample> out;
  for (const auto& c : candidates) {
    const auto it = index.find({c.image_id, c.region_ids});
    if (it == index.end()) {
      throw DataError("candidate for image " + c.image_id + " (regions '" +
                      text::join(c.region_ids) + "') has no references in split '" +
                      std::string(split) + "'");
    }
    EvalExample e;
    e.image_id = c.image_id;
    e.region_ids = c.region_ids;
    e.candidate = c.words;
    for (const auto& cap : it->second->captions) e.references.push_back(cap.words);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Sentence> reference_captions(const CorpusBundle& bundle, std::string_view split) {
  std::vector<Sentence> out;
  for (const BundleExample* ex : bundle.split(split)) {
    for (const auto& c : ex->captions) out.push_back(c.words);
  }
  return out;
}

}  // namespace regionptr
