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

#include <string>
#include <vector>

#include "regionptr/nn/parameters.h"
#include "regionptr/random.h"

namespace regionptr::nn {

struct LayerState {
  Vector h;
  Vector c;
};

// Bottom layer first.
using LstmState = std::vector<LayerState>;

// Inverted dropout masks for the non-recurrent connections. An empty
// vector means "no dropout" on that connection.
struct DropoutMasks {
  Vector input;                // applied to the stack input
  std::vector<Vector> between;  // between[l] applied to layer l's output
                                // before it enters layer l + 1
};

// Entries are 0 with probability p and 1 / (1 - p) otherwise.
Vector dropout_mask(Eigen::Index size, double p, Rng& rng);

struct LayerCache {
  Vector x;  // layer input after dropout
  Vector h_prev;
  Vector c_prev;
  Vector i, f, g, o;
  Vector c;
  Vector tanh_c;
};

struct StepCache {
  std::vector<LayerCache> layers;
  DropoutMasks masks;
};

// Stacked LSTM. Per layer l the parameters are
//   <prefix>.l<l>.w_x  (input x 4H)
//   <prefix>.l<l>.w_h  (H x 4H)
//   <prefix>.l<l>.b    (4H x 1)
// with gate blocks ordered (input, forget, cell, output):
//   z = x W_x + h W_h + b
//   c' = sigmoid(f) * c + sigmoid(i) * tanh(g)
//   h' = sigmoid(o) * tanh(c')
// Dropout is only ever applied to the non-recurrent inputs.
class LstmStack {
 public:
  LstmStack() = default;
  // Registers the parameters in `params`.
  LstmStack(ParameterSet& params, const std::string& prefix,
            Eigen::Index input_size, Eigen::Index hidden_size,
            std::size_t layers = 2);

  Eigen::Index input_size() const { return input_size_; }
  Eigen::Index hidden_size() const { return hidden_size_; }
  std::size_t layers() const { return layer_params_.size(); }

  LstmState zero_state() const;

  // One timestep. Returns the top layer's new hidden state and writes the
  // new per-layer state into `next`. `cache` may be null when no backward
  // pass is needed.
  Vector step(const ParameterSet& params, const Vector& input,
              const LstmState& prev, LstmState& next,
              const DropoutMasks& masks = {}, StepCache* cache = nullptr) const;

  // Backward for one timestep. On entry `dstate` holds dL/d(next state)
  // (not including `dh_top`, which is added to the top layer); on exit it
  // holds dL/d(prev state). Accumulates parameter gradients and writes
  // dL/d(input) into `dinput`.
  void step_backward(ParameterSet& params, const StepCache& cache,
                     const Vector& dh_top, LstmState& dstate,
                     Vector& dinput) const;

  // Throws InvalidArgument unless the state has the right layer count and
  // sizes.
  void check_state(const LstmState& state) const;

 private:
  struct LayerParams {
    std::size_t w_x;
    std::size_t w_h;
    std::size_t b;
  };

  Eigen::Index input_size_ = 0;
  Eigen::Index hidden_size_ = 0;
  std::vector<LayerParams> layer_params_;
};

}  // namespace regionptr::nn
