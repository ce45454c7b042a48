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

#include "regionptr/nn/parameters.h"

#include <cmath>

#include "regionptr/error.h"
#include "regionptr/random.h"

namespace regionptr::nn {

std::size_t ParameterSet::add(std::string name, Eigen::Index rows,
                              Eigen::Index cols, Role role) {
  if (find(name) != nullptr) {
    throw InvalidArgument("duplicate parameter name '" + name + "'");
  }
  if (rows <= 0 || cols <= 0) {
    throw InvalidArgument("parameter '" + name + "' has an empty shape");
  }
  Parameter p;
  p.name = std::move(name);
  p.role = role;
  p.value = Matrix::Zero(rows, cols);
  p.grad = Matrix::Zero(rows, cols);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

Parameter& ParameterSet::at(std::string_view name) {
  if (Parameter* p = find(name)) return *p;
  throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
}

const Parameter& ParameterSet::at(std::string_view name) const {
  if (const Parameter* p = find(name)) return *p;
  throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
}

Parameter* ParameterSet::find(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const Parameter* ParameterSet::find(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParameterSet::check_finite_grads() const {
  for (const auto& p : params_) {
    if (!p.grad.allFinite()) {
      throw NumericError("non-finite gradient in parameter '" + p.name + "'");
    }
  }
}

void init_parameters(ParameterSet& params, std::uint64_t seed) {
  Rng rng(seed);
  for (auto& p : params) {
    // Column-major fill order, matching Eigen storage.
    for (Eigen::Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      switch (p.role) {
        case Role::kWeight:
          x = rng.uniform(-0.1, 0.1);
          break;
        case Role::kBias:
          x = 0.0;
          break;
        case Role::kEmbedding:
          x = rng.uniform(-1.0, 1.0);
          break;
      }
    }
    p.grad.setZero();
  }
}

}  // namespace regionptr::nn
