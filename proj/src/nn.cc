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

#include "cotrec/nn.h"

#include <algorithm>
#include <cmath>

#include "cotrec/errors.h"

namespace cotrec {

MatrixXd layer_norm_forward(const MatrixXd& x, const MatrixXd& gain, const MatrixXd& bias,
                            LayerNormCache* cache) {
  const Eigen::Index d = x.cols();
  MatrixXd normalized(x.rows(), d);
  VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const double var = (x.row(r).array() - mean).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
    normalized.row(r) = (x.row(r).array() - mean) * inv_std(r);
  }
  MatrixXd y = (normalized.array().rowwise() * gain.row(0).array()).matrix();
  y.rowwise() += bias.row(0);
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

MatrixXd layer_norm_backward(const MatrixXd& dy, const MatrixXd& gain,
                             const LayerNormCache& cache, MatrixXd& dgain, MatrixXd& dbias) {
  const double d = static_cast<double>(dy.cols());
  dgain.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  MatrixXd dnorm = (dy.array().rowwise() * gain.row(0).array()).matrix();
  MatrixXd dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const double sum = dnorm.row(r).sum();
    const double dot = dnorm.row(r).dot(cache.normalized.row(r));
    dx.row(r) = (cache.inv_std(r) / d) *
                (d * dnorm.row(r).array() - sum - cache.normalized.row(r).array() * dot)
                    .matrix();
  }
  return dx;
}

MatrixXd linear_forward(const MatrixXd& x, const MatrixXd& weight, const MatrixXd& bias) {
  MatrixXd y = x * weight;
  y.rowwise() += bias.row(0);
  return y;
}

MatrixXd linear_backward(const MatrixXd& dy, const MatrixXd& x, const MatrixXd& weight,
                         MatrixXd& dweight, MatrixXd& dbias) {
  dweight.noalias() += x.transpose() * dy;
  dbias.row(0) += dy.colwise().sum();
  return dy * weight.transpose();
}

MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  MatrixXd m(rows, cols);
  // Row-major fill so the draw order matches the serialized layout.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal(0.0, stddev);
  }
  return m;
}

OptimizerKind parse_optimizer_kind(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

std::string optimizer_kind_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

void Optimizer::step(const TensorList& params, const TensorList& grads) {
  if (params.size() != grads.size()) throw ContractError("optimizer: param/grad mismatch");
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) *params[i].second -= lr * *grads[i].second;
    return;
  }
  if (first_moment_.empty()) {
    for (const auto& [name, p] : params) {
      first_moment_.push_back(MatrixXd::Zero(p->rows(), p->cols()));
      second_moment_.push_back(MatrixXd::Zero(p->rows(), p->cols()));
    }
  }
  ++steps_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const MatrixXd& g = *grads[i].second;
    first_moment_[i] = b1 * first_moment_[i] + (1.0 - b1) * g;
    second_moment_[i] = b2 * second_moment_[i] + (1.0 - b2) * g.cwiseProduct(g);
    *params[i].second -=
        (lr * (first_moment_[i] / c1).array() /
         ((second_moment_[i] / c2).array().sqrt() + config_.epsilon))
            .matrix();
  }
}

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

double max_gradient_error(const TensorList& params, const TensorList& grads,
                          const std::function<double()>& loss, double step) {
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    MatrixXd& p = *params[t].second;
    const MatrixXd& g = *grads[t].second;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double saved = p.data()[i];
      p.data()[i] = saved + step;
      const double plus = loss();
      p.data()[i] = saved - step;
      const double minus = loss();
      p.data()[i] = saved;
      const double numeric = (plus - minus) / (2.0 * step);
      worst = std::max(worst, gradient_relative_error(g.data()[i], numeric));
    }
  }
  return worst;
}

void zero_tensors(const TensorList& tensors) {
  for (const auto& [name, t] : tensors) t->setZero();
}

}  // namespace cotrec
