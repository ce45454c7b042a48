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

#include "regionptr/corpus.h"
#include "regionptr/nn/parameters.h"

namespace regionptr::nn {

// y = x W + b with W of shape n x m. Throws InvalidArgument on shape
// mismatch.
Vector linear(const Eigen::Ref<const Vector>& x, const Matrix& W,
              const Eigen::Ref<const Vector>& b);

// Accumulates dW += x dy^T and db += dy; writes dx = W dy when dx is
// non-null.
void linear_backward(const Eigen::Ref<const Vector>& x, const Matrix& W,
                     const Eigen::Ref<const Vector>& dy, Vector* dx,
                     Matrix& dW, Eigen::Ref<Vector> db);

double sigmoid(double x);
Vector sigmoid(const Vector& x);

// Max-subtracted softmax.
Vector softmax(const Eigen::Ref<const Vector>& logits);

struct CrossEntropy {
  double loss = 0;
  Vector dlogits;  // softmax(logits) - onehot(target)
};

// -log softmax(logits)[target]. Throws InvalidArgument for V < 2 or a
// target outside [0, V).
CrossEntropy softmax_cross_entropy(const Eigen::Ref<const Vector>& logits,
                                   TokenId target);

}  // namespace regionptr::nn
