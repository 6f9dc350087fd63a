// Copyright 2026 The cotrec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cotrec/rng.h"

namespace cotrec {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Named view over a model's parameter (or gradient) tensors, in a fixed order.
using TensorList = std::vector<std::pair<std::string, MatrixXd*>>;

/// Row-wise layer normalization cache.
struct LayerNormCache {
  MatrixXd normalized;
  VectorXd inv_std;
};

inline constexpr double kLayerNormEps = 1e-8;

/// y = gain * (x - mean) / sqrt(var + eps) + bias, per row. gain/bias are 1 x d.
MatrixXd layer_norm_forward(const MatrixXd& x, const MatrixXd& gain, const MatrixXd& bias,
                            LayerNormCache* cache);

/// Returns dx and accumulates into dgain/dbias.
MatrixXd layer_norm_backward(const MatrixXd& dy, const MatrixXd& gain,
                             const LayerNormCache& cache, MatrixXd& dgain, MatrixXd& dbias);

/// y = x W + b with b broadcast over rows (b is 1 x out).
MatrixXd linear_forward(const MatrixXd& x, const MatrixXd& weight, const MatrixXd& bias);

/// Returns dx and accumulates into dweight/dbias.
MatrixXd linear_backward(const MatrixXd& dy, const MatrixXd& x, const MatrixXd& weight,
                         MatrixXd& dweight, MatrixXd& dbias);

MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kSgd;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

OptimizerKind parse_optimizer_kind(const std::string& name);
std::string optimizer_kind_name(OptimizerKind kind);

/// First-order optimizer over a fixed list of tensors.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config) : config_(config) {}

  void step(const TensorList& params, const TensorList& grads);

  const OptimizerConfig& config() const { return config_; }

 private:
  OptimizerConfig config_;
  std::vector<MatrixXd> first_moment_;
  std::vector<MatrixXd> second_moment_;
  long steps_ = 0;
};

/// |analytic - numeric| / max(|analytic|, |numeric|, floor).
double gradient_relative_error(double analytic, double numeric,
                               double floor = 1e-6);

/// Central-difference check of every entry of `params` against `grads`.
/// `loss` must re-evaluate the loss from the current parameter values.
double max_gradient_error(const TensorList& params, const TensorList& grads,
                          const std::function<double()>& loss, double step = 1e-5);

void zero_tensors(const TensorList& tensors);

}  // namespace cotrec
