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

#include "regionptr/nn/optimizer.h"

#include <cmath>

#include "regionptr/error.h"

namespace regionptr::nn {

void Sgd::step(ParameterSet& params) {
  params.check_finite_grads();
  for (auto& p : params) p.value -= learning_rate_ * p.grad;
}

void Adam::step(ParameterSet& params) {
  params.check_finite_grads();
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  if (m_.size() != params.size()) {
    throw InvalidArgument("optimizer state does not match parameter set");
  }
  ++t_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = params[k];
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * p.grad;
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= learning_rate_ * (m_[k].array() / correction1) /
                       ((v_[k].array() / correction2).sqrt() + epsilon_);
  }
}

void Adam::restore(std::vector<Matrix> m, std::vector<Matrix> v, long t) {
  if (m.size() != v.size()) throw InvalidArgument("Adam state size mismatch");
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

std::unique_ptr<Optimizer> make_optimizer(const std::string& name,
                                          double learning_rate) {
  if (name == "adam") return std::make_unique<Adam>(learning_rate);
  if (name == "sgd") return std::make_unique<Sgd>(learning_rate);
  throw InvalidArgument("unknown optimizer '" + name + "'");
}

}  // namespace regionptr::nn
