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
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "regionptr/corpus.h"
#include "regionptr/features.h"
#include "regionptr/nn/checkpoint.h"
#include "regionptr/nn/lstm.h"
#include "regionptr/nn/optimizer.h"
#include "regionptr/nn/parameters.h"

namespace regionptr {

struct ModelConfig {
  std::size_t embed_dim = 1024;       // E
  std::size_t hidden_dim = 1024;      // H
  std::size_t appearance_dim = 2048;  // D
  std::size_t vocab_size = 0;         // V, including the reserved tokens
  double dropout = 0.7;

  std::size_t region_dim() const { return appearance_dim + kGeometryDims; }
  std::size_t input_dim() const { return embed_dim + region_dim(); }
  // Throws InvalidArgument for non-positive sizes or dropout outside [0, 1).
  void validate() const;
};

inline constexpr std::size_t kLstmLayers = 2;

// One prediction step.
struct TraceRecord {
  std::size_t step = 0;     // 1-based timestep t
  std::size_t pointer = 0;  // 0-based region pointer feeding this step
  bool empty_region = false;
  double alpha = 0;
  TokenId input = 0;   // w_{t-1}
  TokenId output = 0;  // ground truth (training) or the emitted token
};

// One record per line: "t=<step> pointer=<p> empty=<0|1> alpha=<a>
// input=<tok> output=<tok>". Tokens are written as words when a vocabulary
// is given, as ids otherwise.
void write_trace(std::ostream& out, std::span<const TraceRecord> trace,
                 const Vocabulary* vocab = nullptr);

// i_t = [alpha * word_emb, (1 - alpha) * region].
nn::Vector compose_input(double alpha, const nn::Vector& word_emb,
                         const nn::Vector& region);

// Two-layer LSTM captioner whose input at every step is the gated
// concatenation of the previous word embedding and the current region.
//
// Parameters:
//   embedding  V x E         gate.w  H x 1       gate.b  1 x 1
//   lstm.l<k>.{w_x,w_h,b}    output.w H x V      output.b V x 1
//   init_h.w  (D+5) x 2H     init_h.b 2H x 1     (same for init_c)
class Captioner {
 public:
  struct Step {
    nn::Vector logits;
    nn::LstmState state;
    double alpha = 0;
  };

  // Builds and initializes the parameters from `seed`.
  Captioner(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  nn::ParameterSet& parameters() { return params_; }
  const nn::ParameterSet& parameters() const { return params_; }
  const nn::LstmStack& lstm() const { return lstm_; }

  // Hidden and cell states from two separate linear maps of the full-image
  // region; output block k is layer k's state. No nonlinearity.
  nn::LstmState init_state(const RegionFeatureVector& full_image) const;

  // sigmoid(h_prev . W_alpha + b_alpha), h_prev = previous top-layer hidden.
  double gate(const nn::Vector& h_prev) const;

  nn::Vector embed(TokenId token) const;

  // Inference step, no dropout. Throws InvalidArgument for an id outside
  // the vocabulary or a region of the wrong size.
  Step forward_step(const nn::LstmState& state, TokenId prev_token,
                    const RegionFeatureVector& region) const;

  // Header carries dims and the layout tags. When `optimizer` is an Adam
  // instance with state, its moments are stored too.
  nn::Checkpoint to_checkpoint(const nn::Optimizer* optimizer = nullptr) const;
  static Captioner from_checkpoint(const nn::Checkpoint& checkpoint);
  // Restores Adam moments saved by to_checkpoint, if any.
  void restore_optimizer(const nn::Checkpoint& checkpoint,
                         nn::Optimizer& optimizer) const;

  // Parameter indices, for the training pass.
  struct Index {
    std::size_t embedding, gate_w, gate_b, output_w, output_b;
    std::size_t init_h_w, init_h_b, init_c_w, init_c_b;
  };
  const Index& index() const { return index_; }

 private:
  void check_token(TokenId token) const;

  ModelConfig config_;
  nn::ParameterSet params_;
  nn::LstmStack lstm_;
  Index index_{};
};

// A caption encoded for training together with its visual inputs.
struct TrainingExample {
  std::vector<TokenId> tokens;                // BOS ... EOS
  std::vector<RegionFeatureVector> regions;   // grounded region sequence
  RegionFeatureVector full_image;
};

// Throws DataError unless the sequence starts with BOS, ends with EOS, has
// exactly one NEXT per grounded region and all sizes match the model.
void validate_example(const TrainingExample& example, const ModelConfig& config);

// Region fed at pointer value `pointer`: regions[pointer] (or the pooled
// ablation vector) while pointer < len, the empty region afterwards.
RegionFeatureVector teacher_region(const TrainingExample& example,
                                   std::size_t pointer, bool ablation,
                                   std::size_t appearance_dim);

struct TrainOptions {
  bool ablation = false;
  bool dropout = true;  // uses ModelConfig::dropout when set
};

struct SequenceResult {
  double loss = 0;  // mean over the T prediction targets
  std::vector<TraceRecord> trace;
};

// Teacher-forced pass over one sequence without dropout or gradients.
SequenceResult sequence_loss(const Captioner& model,
                             const TrainingExample& example,
                             bool ablation = false);

// Mean over the batch of the per-sequence mean loss. Gradients are zeroed
// and then accumulated into model.parameters(); when `optimizer` is
// non-null one update is applied. Dropout masks for sequence k come from
// derive_seed(dropout_seed, k).
double train_step(Captioner& model, std::span<const TrainingExample> batch,
                  nn::Optimizer* optimizer, const TrainOptions& options,
                  std::uint64_t dropout_seed);

}  // namespace regionptr
