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

#include "regionptr/nn/layers.h"

#include <cmath>

#include "regionptr/error.h"

namespace regionptr::nn {

Vector linear(const Eigen::Ref<const Vector>& x, const Matrix& W,
              const Eigen::Ref<const Vector>& b) {
  if (x.size() != W.rows() || b.size() != W.cols()) {
    throw InvalidArgument("linear: shape mismatch (x " +
                          std::to_string(x.size()) + ", W " +
                          std::to_string(W.rows()) + "x" +
                          std::to_string(W.cols()) + ", b " +
                          std::to_string(b.size()) + ")");
  }
  return W.transpose() * x + b;
}

void linear_backward(const Eigen::Ref<const Vector>& x, const Matrix& W,
                     const Eigen::Ref<const Vector>& dy, Vector* dx,
                     Matrix& dW, Eigen::Ref<Vector> db) {
  if (x.size() != W.rows() || dy.size() != W.cols() ||
      dW.rows() != W.rows() || dW.cols() != W.cols() || db.size() != dy.size()) {
    throw InvalidArgument("linear_backward: shape mismatch");
  }
  dW.noalias() += x * dy.transpose();
  db += dy;
  if (dx != nullptr) *dx = W * dy;
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vector sigmoid(const Vector& x) {
  return x.unaryExpr([](double v) { return sigmoid(v); });
}

Vector softmax(const Eigen::Ref<const Vector>& logits) {
  const Vector shifted = logits.array() - logits.maxCoeff();
  const Vector e = shifted.array().exp();
  return e / e.sum();
}

CrossEntropy softmax_cross_entropy(const Eigen::Ref<const Vector>& logits,
                                   TokenId target) {
  if (logits.size() < 2) {
    throw InvalidArgument("softmax_cross_entropy needs at least two classes");
  }
  if (target < 0 || target >= logits.size()) {
    throw InvalidArgument("target " + std::to_string(target) +
                          " out of range for " + std::to_string(logits.size()) +
                          " classes");
  }
  const double max = logits.maxCoeff();
  const Vector shifted = logits.array() - max;
  const double log_sum = std::log(shifted.array().exp().sum());
  CrossEntropy out;
  out.loss = log_sum - shifted[target];
  out.dlogits = (shifted.array() - log_sum).exp();
  out.dlogits[target] -= 1.0;
  return out;
}

}  // namespace regionptr::nn
