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

#include "regionptr/nn/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regionptr/error.h"
#include "regionptr/random.h"

namespace regionptr::nn {

double relative_error(double analytic, double numeric) {
  const double denom =
      std::max({std::abs(analytic), std::abs(numeric), kGradCheckFloor});
  return std::abs(analytic - numeric) / denom;
}

std::vector<GradCheckResult> finite_difference_check(
    const std::function<double()>& loss, ParameterSet& params, double step,
    std::size_t samples_per_array, std::uint64_t seed, Stencil stencil) {
  const double first = loss();
  const double second = loss();
  if (first != second) {
    throw NumericError("gradient check closure is not deterministic");
  }

  // The closure rewrites every gradient, so take them all up front.
  std::vector<Matrix> analytic_grads;
  for (const auto& p : params) analytic_grads.push_back(p.grad);

  Rng rng(seed);
  std::vector<GradCheckResult> results;
  std::size_t array = 0;
  for (auto& p : params) {
    const Matrix& analytic = analytic_grads[array++];
    const auto total = static_cast<std::size_t>(p.value.size());
    std::vector<std::size_t> coords(total);
    std::iota(coords.begin(), coords.end(), 0);
    if (total > samples_per_array) {
      // Partial Fisher-Yates.
      for (std::size_t k = 0; k < samples_per_array; ++k) {
        const std::size_t j = k + rng.below(total - k);
        std::swap(coords[k], coords[j]);
      }
      coords.resize(samples_per_array);
    }

    GradCheckResult r;
    r.name = p.name;
    r.coordinates = coords.size();
    for (std::size_t idx : coords) {
      double& x = p.value.data()[idx];
      const double saved = x;
      auto at = [&](double offset) {
        x = saved + offset;
        return loss();
      };
      double numeric = 0.0;
      if (stencil == Stencil::kTwoPoint) {
        numeric = (at(step) - at(-step)) / (2.0 * step);
      } else {
        const double near = at(step) - at(-step);
        const double far = at(2.0 * step) - at(-2.0 * step);
        numeric = (8.0 * near - far) / (12.0 * step);
      }
      x = saved;
      const double a = analytic.data()[idx];
      r.max_relative_error =
          std::max(r.max_relative_error, relative_error(a, numeric));
      r.max_absolute_error = std::max(r.max_absolute_error, std::abs(a - numeric));
    }
    results.push_back(r);
  }
  array = 0;
  for (auto& p : params) p.grad = analytic_grads[array++];
  return results;
}

}  // namespace regionptr::nn
