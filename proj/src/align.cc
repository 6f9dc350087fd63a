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

#include "cotrec/align.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cotrec/errors.h"

namespace cotrec {

TensorList AlignmentNetwork::tensors() {
  return {{"enc_collab_w", &enc_collab_w}, {"enc_collab_b", &enc_collab_b},
          {"enc_sem_w", &enc_sem_w},       {"enc_sem_b", &enc_sem_b},
          {"dec_collab_w", &dec_collab_w}, {"dec_collab_b", &dec_collab_b},
          {"dec_sem_w", &dec_sem_w},       {"dec_sem_b", &dec_sem_b}};
}

AlignmentNetwork AlignmentNetwork::zeros_like() const {
  AlignmentNetwork z = *this;
  zero_tensors(z.tensors());
  return z;
}

std::string AlignmentNetwork::digest() const {
  AlignmentNetwork copy = *this;
  Digest dg;
  for (const auto& [name, t] : copy.tensors()) dg.update(name).update(*t);
  dg.update(&alpha, sizeof(alpha)).update(&beta, sizeof(beta));
  return dg.hex();
}

void AlignmentNetwork::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0)) {
    throw ConfigError("align.alpha and align.beta must be in (0, 1]");
  }
  const int k = latent_dim();
  if (enc_sem_w.cols() != k || dec_collab_w.rows() != k || dec_sem_w.rows() != k ||
      dec_collab_w.cols() != collab_dim() || dec_sem_w.cols() != semantic_dim()) {
    throw ContractError("alignment network shapes are inconsistent");
  }
}

AlignmentNetwork init_alignment_network(int collab_dim, Rng& rng, double alpha, double beta,
                                        int semantic_dim, int latent_dim) {
  AlignmentNetwork net;
  net.enc_collab_w = random_normal(collab_dim, latent_dim, 1.0 / std::sqrt(collab_dim), rng);
  net.enc_collab_b = MatrixXd::Zero(1, latent_dim);
  net.enc_sem_w = random_normal(semantic_dim, latent_dim, 1.0 / std::sqrt(semantic_dim), rng);
  net.enc_sem_b = MatrixXd::Zero(1, latent_dim);
  net.dec_collab_w = random_normal(latent_dim, collab_dim, 1.0 / std::sqrt(latent_dim), rng);
  net.dec_collab_b = MatrixXd::Zero(1, collab_dim);
  net.dec_sem_w = random_normal(latent_dim, semantic_dim, 1.0 / std::sqrt(latent_dim), rng);
  net.dec_sem_b = MatrixXd::Zero(1, semantic_dim);
  net.alpha = alpha;
  net.beta = beta;
  return net;
}

namespace {

const MatrixXd& enc_w(const AlignmentNetwork& n, Modality m) {
  return m == Modality::kCollaborative ? n.enc_collab_w : n.enc_sem_w;
}
const MatrixXd& enc_b(const AlignmentNetwork& n, Modality m) {
  return m == Modality::kCollaborative ? n.enc_collab_b : n.enc_sem_b;
}

}  // namespace

VectorXd encode(const AlignmentNetwork& net, Modality modality, const VectorXd& input) {
  const MatrixXd& w = enc_w(net, modality);
  if (input.size() != w.rows()) {
    throw ContractError("encode: input has dimension " + std::to_string(input.size()) +
                        ", expected " + std::to_string(w.rows()));
  }
  return (input.transpose() * w + enc_b(net, modality)).transpose();
}

VectorXd decode(const AlignmentNetwork& net, Modality modality, const VectorXd& latent) {
  const MatrixXd& w = modality == Modality::kCollaborative ? net.dec_collab_w : net.dec_sem_w;
  const MatrixXd& b = modality == Modality::kCollaborative ? net.dec_collab_b : net.dec_sem_b;
  if (latent.size() != w.rows()) throw ContractError("decode: latent dimension mismatch");
  return (latent.transpose() * w + b).transpose();
}

namespace {

// Rows of every group stacked, each weighted by 1 / (|group| * #groups) so a
// weighted sum of row norms equals the nested mean.
struct StackedGroups {
  MatrixXd collab;
  MatrixXd semantic;
  VectorXd weight;
};

StackedGroups stack_groups(std::span<const AlignmentGroup> groups, const char* what) {
  if (groups.empty()) throw ContractError(std::string(what) + ": empty batch");
  Eigen::Index rows = 0;
  for (const AlignmentGroup& g : groups) {
    if (g.collab.rows() == 0) throw ContractError(std::string(what) + ": empty sequence group");
    if (g.semantic.rows() != g.collab.rows()) {
      throw ContractError(std::string(what) + ": group modalities differ in length");
    }
    rows += g.collab.rows();
  }
  StackedGroups s;
  s.collab.resize(rows, groups.front().collab.cols());
  s.semantic.resize(rows, groups.front().semantic.cols());
  s.weight.resize(rows);
  const double inv_groups = 1.0 / static_cast<double>(groups.size());
  Eigen::Index at = 0;
  for (const AlignmentGroup& g : groups) {
    const Eigen::Index n = g.collab.rows();
    s.collab.middleRows(at, n) = g.collab;
    s.semantic.middleRows(at, n) = g.semantic;
    s.weight.segment(at, n).setConstant(inv_groups / static_cast<double>(n));
    at += n;
  }
  return s;
}

double weighted_sq_norm(const MatrixXd& m, const VectorXd& w) {
  return m.rowwise().squaredNorm().dot(w);
}

}  // namespace

double alignment_loss(const AlignmentNetwork& net, std::span<const AlignmentGroup> groups,
                      AlignmentNetwork* grads) {
  const StackedGroups s = stack_groups(groups, "alignment_loss");
  const MatrixXd gap = linear_forward(s.collab, net.enc_collab_w, net.enc_collab_b) -
                       linear_forward(s.semantic, net.enc_sem_w, net.enc_sem_b);
  if (grads) {
    const MatrixXd d_gap = 2.0 * (s.weight.asDiagonal() * gap);
    linear_backward(d_gap, s.collab, net.enc_collab_w, grads->enc_collab_w, grads->enc_collab_b);
    linear_backward(-d_gap, s.semantic, net.enc_sem_w, grads->enc_sem_w, grads->enc_sem_b);
  }
  return weighted_sq_norm(gap, s.weight);
}

namespace {

// Shared body of the two reconstruction terms.
double recon_loss(std::span<const AlignmentGroup> groups, bool collab, const MatrixXd& ew,
                  const MatrixXd& eb, const MatrixXd& dw, const MatrixXd& db,
                  AlignmentNetwork* grads, double weight) {
  const StackedGroups s = stack_groups(groups, "reconstruction_loss");
  const MatrixXd& x = collab ? s.collab : s.semantic;
  const MatrixXd z = linear_forward(x, ew, eb);
  const MatrixXd err = linear_forward(z, dw, db) - x;
  if (grads) {
    const MatrixXd d_err = (2.0 * weight) * (s.weight.asDiagonal() * err);
    MatrixXd& gdw = collab ? grads->dec_collab_w : grads->dec_sem_w;
    MatrixXd& gdb = collab ? grads->dec_collab_b : grads->dec_sem_b;
    MatrixXd& gew = collab ? grads->enc_collab_w : grads->enc_sem_w;
    MatrixXd& geb = collab ? grads->enc_collab_b : grads->enc_sem_b;
    const MatrixXd dz = linear_backward(d_err, z, dw, gdw, gdb);
    linear_backward(dz, x, ew, gew, geb);
  }
  return weighted_sq_norm(err, s.weight);
}

}  // namespace

double item_reconstruction_loss(const AlignmentNetwork& net,
                                std::span<const AlignmentGroup> groups, AlignmentNetwork* grads,
                                double weight) {
  return recon_loss(groups, true, net.enc_collab_w, net.enc_collab_b, net.dec_collab_w,
                    net.dec_collab_b, grads, weight);
}

double text_reconstruction_loss(const AlignmentNetwork& net,
                                std::span<const AlignmentGroup> groups, AlignmentNetwork* grads,
                                double weight) {
  return recon_loss(groups, false, net.enc_sem_w, net.enc_sem_b, net.dec_sem_w, net.dec_sem_b,
                    grads, weight);
}

double reconstruction_loss(const AlignmentNetwork& net, std::span<const AlignmentGroup> groups,
                           AlignmentNetwork* grads) {
  return net.alpha * item_reconstruction_loss(net, groups, grads, net.alpha) +
         net.beta * text_reconstruction_loss(net, groups, grads, net.beta);
}

double recommendation_loss(const AlignmentNetwork& net, const RecommendationTriples& triples,
                           AlignmentNetwork* grads) {
  const Eigen::Index m = triples.size();
  if (m == 0) return 0.0;
  const int d = net.collab_dim();
  if (triples.users.cols() != d || triples.positives.cols() != d ||
      triples.negatives.cols() != d) {
    throw ContractError("recommendation_loss: triple vectors must have the collaborative dim");
  }
  double total = 0.0;
  for (int side = 0; side < 2; ++side) {
    const bool positive = side == 0;
    const MatrixXd& items = positive ? triples.positives : triples.negatives;
    MatrixXd z = linear_forward(items, net.enc_collab_w, net.enc_collab_b);
    MatrixXd recon = linear_forward(z, net.dec_collab_w, net.dec_collab_b);
    MatrixXd d_recon = MatrixXd::Zero(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double s = triples.users.row(i).dot(recon.row(i));
      const double p = sigmoid(s);
      // Gradient vanishes wherever the clamp is active.
      if (positive) {
        total -= std::log(std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp));
        if (p > kProbabilityClamp && p < 1.0 - kProbabilityClamp) {
          d_recon.row(i) = (p - 1.0) * triples.users.row(i);
        }
      } else {
        total -= std::log(1.0 - std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp));
        if (p > kProbabilityClamp && p < 1.0 - kProbabilityClamp) {
          d_recon.row(i) = p * triples.users.row(i);
        }
      }
    }
    if (grads) {
      MatrixXd dz = linear_backward(d_recon, z, net.dec_collab_w, grads->dec_collab_w,
                                    grads->dec_collab_b);
      linear_backward(dz, items, net.enc_collab_w, grads->enc_collab_w, grads->enc_collab_b);
    }
  }
  return total;
}

LossBreakdown total_loss(const AlignmentNetwork& net, const AlignmentBatch& batch,
                         AlignmentNetwork* grads) {
  LossBreakdown out;
  if (!batch.groups.empty()) {
    out.align = alignment_loss(net, batch.groups, grads);
    out.reconstruction = reconstruction_loss(net, batch.groups, grads);
  }
  out.recommendation = recommendation_loss(net, batch.triples, grads);
  return out;
}

void alignment_gradient(const AlignmentNetwork& net, const AlignmentBatch& batch,
                        AlignmentNetwork& grads) {
  grads = net.zeros_like();
  total_loss(net, batch, &grads);
}

double gradient_check(const AlignmentNetwork& net, const AlignmentBatch& batch,
                      const AlignmentGradientFn& gradient, double step) {
  AlignmentNetwork probe = net;
  AlignmentNetwork grads = net.zeros_like();
  gradient(probe, batch, grads);
  return max_gradient_error(probe.tensors(), grads.tensors(),
                            [&] { return total_loss(probe, batch).total(); }, step);
}

AlignmentBatch make_batch(std::span<const AlignmentExample> examples) {
  AlignmentBatch batch;
  std::vector<const AlignmentExample*> with_triple;
  for (const auto& ex : examples) {
    batch.groups.push_back(ex.group);
    if (ex.has_triple) with_triple.push_back(&ex);
  }
  if (!with_triple.empty()) {
    const Eigen::Index d = with_triple.front()->user.size();
    const Eigen::Index m = static_cast<Eigen::Index>(with_triple.size());
    batch.triples.users.resize(m, d);
    batch.triples.positives.resize(m, d);
    batch.triples.negatives.resize(m, d);
    for (Eigen::Index i = 0; i < m; ++i) {
      batch.triples.users.row(i) = with_triple[i]->user.transpose();
      batch.triples.positives.row(i) = with_triple[i]->positive.transpose();
      batch.triples.negatives.row(i) = with_triple[i]->negative.transpose();
    }
  }
  return batch;
}

AlignmentTrainResult train_alignment(AlignmentNetwork net,
                                     std::span<const AlignmentExample> dataset,
                                     const AlignmentTrainConfig& config, Rng& rng) {
  net.validate();
  if (config.epochs < 0 || config.batch_size < 1 || !(config.learning_rate >= 0.0)) {
    throw ConfigError("invalid alignment training configuration");
  }
  if (dataset.empty()) throw ContractError("train_alignment: empty dataset");
  const AlignmentBatch full = make_batch(dataset);
  AlignmentTrainResult result;
  result.initial_loss = total_loss(net, full);

  Optimizer opt(OptimizerConfig{config.optimizer, config.learning_rate});
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<AlignmentExample> chunk;
      for (std::size_t i = start; i < end; ++i) chunk.push_back(dataset[order[i]]);
      const AlignmentBatch batch = make_batch(chunk);
      AlignmentNetwork grads = net.zeros_like();
      const double loss = total_loss(net, batch, &grads).total();
      if (!std::isfinite(loss)) {
        throw TrainingError("alignment training diverged at epoch " + std::to_string(epoch + 1) +
                            ", batch " + std::to_string(start / config.batch_size + 1));
      }
      opt.step(net.tensors(), grads.tensors());
    }
    result.epoch_losses.push_back(total_loss(net, full));
    if (!std::isfinite(result.epoch_losses.back().total())) {
      throw TrainingError("alignment training diverged at epoch " + std::to_string(epoch + 1));
    }
  }
  result.net = std::move(net);
  return result;
}

std::string to_string(EmbeddingSource source) {
  return source == EmbeddingSource::kCollaborativePath ? "collaborative_path" : "semantic_path";
}

UnifiedEmbedding unified_item_embedding(const AlignmentNetwork& net, const std::string& item_id,
                                        const CfModel& cf, const SemanticStore& semantics) {
  if (auto e = cf.item_embedding(item_id)) {
    return UnifiedEmbedding{item_id, encode(net, Modality::kCollaborative, *e),
                            EmbeddingSource::kCollaborativePath};
  }
  if (semantics.contains(item_id)) {
    return UnifiedEmbedding{item_id, encode(net, Modality::kSemantic, semantics.at(item_id)),
                            EmbeddingSource::kSemanticPath};
  }
  throw DataError("item '" + item_id + "' has neither a collaborative nor a semantic embedding");
}

VectorXd semantic_standin(const AlignmentNetwork& net, const VectorXd& semantic) {
  return decode(net, Modality::kCollaborative, encode(net, Modality::kSemantic, semantic));
}

Checkpoint AlignmentNetwork::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "alignment_network";
  ckpt.set_meta("alpha", format_double(alpha));
  ckpt.set_meta("beta", format_double(beta));
  AlignmentNetwork copy = *this;
  for (const auto& [name, t] : copy.tensors()) ckpt.add_tensor(name, *t);
  return ckpt;
}

AlignmentNetwork AlignmentNetwork::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "alignment_network") {
    throw DataError("not an alignment_network checkpoint: " + ckpt.kind);
  }
  AlignmentNetwork net;
  net.alpha = parse_double(ckpt.meta_value("alpha"));
  net.beta = parse_double(ckpt.meta_value("beta"));
  for (const auto& [name, t] : net.tensors()) *t = ckpt.tensor(name);
  net.validate();
  return net;
}

}  // namespace cotrec
