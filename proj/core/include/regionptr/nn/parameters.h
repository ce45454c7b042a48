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

#include <Eigen/Core>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>

namespace regionptr::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Initialization family of a parameter.
enum class Role {
  kWeight,     // Uniform[-0.1, 0.1]
  kBias,       // 0
  kEmbedding,  // Uniform[-1, 1]
};

struct Parameter {
  std::string name;
  Role role = Role::kWeight;
  Matrix value;
  Matrix grad;  // same shape as value
};

// Named parameter arrays in insertion order. Element addresses are stable
// across add() calls.
class ParameterSet {
 public:
  // Returns the index of the new parameter. Throws InvalidArgument on a
  // duplicate name.
  std::size_t add(std::string name, Eigen::Index rows, Eigen::Index cols,
                  Role role);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  // Throws InvalidArgument for an unknown name.
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  Parameter* find(std::string_view name);
  const Parameter* find(std::string_view name) const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t scalar_count() const;
  // Throws NumericError naming the first parameter with a non-finite
  // gradient entry.
  void check_finite_grads() const;

 private:
  std::deque<Parameter> params_;
};

// Weights ~ Uniform[-0.1, 0.1], biases = 0, embeddings ~ Uniform[-1, 1].
// Parameters are filled in insertion order from one generator seeded with
// `seed`.
void init_parameters(ParameterSet& params, std::uint64_t seed);

}  // namespace regionptr::nn
