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

#include "regionptr/nn/lstm.h"

#include "regionptr/error.h"
#include "regionptr/nn/layers.h"

namespace regionptr::nn {

Vector dropout_mask(Eigen::Index size, double p, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) {
    throw InvalidArgument("dropout probability must be in [0, 1)");
  }
  Vector mask(size);
  const double keep_scale = 1.0 / (1.0 - p);
  for (Eigen::Index i = 0; i < size; ++i) {
    mask[i] = rng.bernoulli(p) ? 0.0 : keep_scale;
  }
  return mask;
}

LstmStack::LstmStack(ParameterSet& params, const std::string& prefix,
                     Eigen::Index input_size, Eigen::Index hidden_size,
                     std::size_t layers)
    : input_size_(input_size), hidden_size_(hidden_size) {
  if (input_size <= 0 || hidden_size <= 0 || layers == 0) {
    throw InvalidArgument("LSTM sizes must be positive");
  }
  for (std::size_t l = 0; l < layers; ++l) {
    const std::string base = prefix + ".l" + std::to_string(l);
    const Eigen::Index in = l == 0 ? input_size : hidden_size;
    LayerParams lp;
    lp.w_x = params.add(base + ".w_x", in, 4 * hidden_size, Role::kWeight);
    lp.w_h = params.add(base + ".w_h", hidden_size, 4 * hidden_size,
                        Role::kWeight);
    lp.b = params.add(base + ".b", 4 * hidden_size, 1, Role::kBias);
    layer_params_.push_back(lp);
  }
}

LstmState LstmStack::zero_state() const {
  return LstmState(layers(), LayerState{Vector::Zero(hidden_size_),
                                        Vector::Zero(hidden_size_)});
}

void LstmStack::check_state(const LstmState& state) const {
  if (state.size() != layers()) {
    throw InvalidArgument("LSTM state has " + std::to_string(state.size()) +
                          " layers, expected " + std::to_string(layers()));
  }
  for (const auto& s : state) {
    if (s.h.size() != hidden_size_ || s.c.size() != hidden_size_) {
      throw InvalidArgument("LSTM state size mismatch");
    }
  }
}

Vector LstmStack::step(const ParameterSet& params, const Vector& input,
                       const LstmState& prev, LstmState& next,
                       const DropoutMasks& masks, StepCache* cache) const {
  if (input.size() != input_size_) {
    throw InvalidArgument("LSTM input has size " + std::to_string(input.size()) +
                          ", expected " + std::to_string(input_size_));
  }
  check_state(prev);
  const Eigen::Index H = hidden_size_;
  next.resize(layers());
  if (cache != nullptr) {
    cache->layers.resize(layers());
    cache->masks = masks;
  }

  Vector x = masks.input.size() > 0 ? Vector(input.cwiseProduct(masks.input))
                                    : input;
  for (std::size_t l = 0; l < layers(); ++l) {
    const LayerParams& lp = layer_params_[l];
    const Matrix& w_x = params[lp.w_x].value;
    const Matrix& w_h = params[lp.w_h].value;
    const auto b = params[lp.b].value.col(0);

    Vector z = w_x.transpose() * x;
    z.noalias() += w_h.transpose() * prev[l].h;
    z += b;

    Vector i = sigmoid(Vector(z.segment(0, H)));
    Vector f = sigmoid(Vector(z.segment(H, H)));
    Vector g = z.segment(2 * H, H).array().tanh();
    Vector o = sigmoid(Vector(z.segment(3 * H, H)));
    Vector c = f.cwiseProduct(prev[l].c) + i.cwiseProduct(g);
    Vector tanh_c = c.array().tanh();
    Vector h = o.cwiseProduct(tanh_c);

    if (cache != nullptr) {
      LayerCache& lc = cache->layers[l];
      lc.x = x;
      lc.h_prev = prev[l].h;
      lc.c_prev = prev[l].c;
      lc.i = i;
      lc.f = f;
      lc.g = g;
      lc.o = o;
      lc.c = c;
      lc.tanh_c = tanh_c;
    }
    next[l].h = h;
    next[l].c = c;

    if (l + 1 < layers()) {
      const bool drop = l < masks.between.size() && masks.between[l].size() > 0;
      x = drop ? Vector(h.cwiseProduct(masks.between[l])) : h;
    }
  }
  return next.back().h;
}

void LstmStack::step_backward(ParameterSet& params, const StepCache& cache,
                              const Vector& dh_top, LstmState& dstate,
                              Vector& dinput) const {
  check_state(dstate);
  const Eigen::Index H = hidden_size_;
  Vector dh_from_above = dh_top;
  for (std::size_t li = layers(); li-- > 0;) {
    const LayerParams& lp = layer_params_[li];
    const LayerCache& lc = cache.layers[li];

    const Vector dh = dstate[li].h + dh_from_above;
    const Vector one_minus_tanh2 =
        (1.0 - lc.tanh_c.array().square()).matrix();
    const Vector dc =
        dstate[li].c + dh.cwiseProduct(lc.o).cwiseProduct(one_minus_tanh2);

    Vector dz(4 * H);
    dz.segment(0, H) = dc.cwiseProduct(lc.g).array() * lc.i.array() *
                       (1.0 - lc.i.array());
    dz.segment(H, H) = dc.cwiseProduct(lc.c_prev).array() * lc.f.array() *
                       (1.0 - lc.f.array());
    dz.segment(2 * H, H) =
        dc.cwiseProduct(lc.i).array() * (1.0 - lc.g.array().square());
    dz.segment(3 * H, H) = dh.cwiseProduct(lc.tanh_c).array() * lc.o.array() *
                           (1.0 - lc.o.array());

    Parameter& w_x = params[lp.w_x];
    Parameter& w_h = params[lp.w_h];
    Parameter& b = params[lp.b];
    w_x.grad.noalias() += lc.x * dz.transpose();
    w_h.grad.noalias() += lc.h_prev * dz.transpose();
    b.grad.col(0) += dz;

    dstate[li].h = w_h.value * dz;
    dstate[li].c = dc.cwiseProduct(lc.f);

    Vector dx = w_x.value * dz;
    if (li > 0) {
      const std::size_t below = li - 1;
      const bool drop = below < cache.masks.between.size() &&
                        cache.masks.between[below].size() > 0;
      dh_from_above = drop ? Vector(dx.cwiseProduct(cache.masks.between[below]))
                           : dx;
    } else {
      dinput = cache.masks.input.size() > 0
                   ? Vector(dx.cwiseProduct(cache.masks.input))
                   : dx;
    }
  }
}

}  // namespace regionptr::nn
