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

#include <memory>
#include <string>
#include <vector>

#include "regionptr/nn/parameters.h"

namespace regionptr::nn {

class Optimizer {
 public:
  virtual ~Optimizer() = default;

  // Applies one update from the gradients currently stored in `params`.
  // Throws NumericError naming the parameter if any gradient is non-finite;
  // no parameter is modified in that case.
  virtual void step(ParameterSet& params) = 0;

  virtual std::string name() const = 0;
  double learning_rate() const { return learning_rate_; }

 protected:
  explicit Optimizer(double learning_rate) : learning_rate_(learning_rate) {}

  double learning_rate_;
};

class Sgd final : public Optimizer {
 public:
  explicit Sgd(double learning_rate) : Optimizer(learning_rate) {}
  void step(ParameterSet& params) override;
  std::string name() const override { return "sgd"; }
};

class Adam final : public Optimizer {
 public:
  explicit Adam(double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8)
      : Optimizer(learning_rate), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

  void step(ParameterSet& params) override;
  std::string name() const override { return "adam"; }

  // Moment estimates, one pair per parameter in ParameterSet order. Empty
  // until the first step.
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  long steps() const { return t_; }
  void restore(std::vector<Matrix> m, std::vector<Matrix> v, long t);

 private:
  double beta1_;
  double beta2_;
  double epsilon_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

// "adam" or "sgd"; throws InvalidArgument otherwise.
std::unique_ptr<Optimizer> make_optimizer(const std::string& name,
                                          double learning_rate);

}  // namespace regionptr::nn
