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
#include <functional>
#include <string>
#include <vector>

#include "regionptr/nn/parameters.h"

namespace regionptr::nn {

struct GradCheckResult {
  std::string name;
  std::size_t coordinates = 0;  // number of entries compared
  double max_relative_error = 0;
  double max_absolute_error = 0;
};

// |a - n| / max(|a|, |n|, kGradCheckFloor). The floor keeps coordinates
// whose true gradient is ~0 from dividing round-off by round-off.
inline constexpr double kGradCheckFloor = 1e-8;
double relative_error(double analytic, double numeric);

// kTwoPoint: (f(x+h) - f(x-h)) / 2h.
// kFourPoint: (8[f(x+h) - f(x-h)] - [f(x+2h) - f(x-2h)]) / 12h, truncation
// error O(h^4), which allows a larger h when gradients are tiny relative to
// the loss.
enum class Stencil { kTwoPoint, kFourPoint };

// Compares the gradients already stored in `params` against central
// differences of `loss`. For each array, up to `samples_per_array`
// coordinates are drawn without replacement (all of them when the array is
// smaller). `loss` must be deterministic; this is checked first and a
// NumericError is thrown otherwise. Parameter values are restored on exit.
std::vector<GradCheckResult> finite_difference_check(
    const std::function<double()>& loss, ParameterSet& params,
    double step = 1e-5, std::size_t samples_per_array = 200,
    std::uint64_t seed = 0, Stencil stencil = Stencil::kTwoPoint);

}  // namespace regionptr::nn
