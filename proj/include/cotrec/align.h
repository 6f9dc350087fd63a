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

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cotrec/cf_backbone.h"
#include "cotrec/io.h"
#include "cotrec/nn.h"
#include "cotrec/semantic.h"

namespace cotrec {

inline constexpr int kLatentDim = 128;

enum class Modality { kCollaborative, kSemantic };

/// Two affine encoders into a shared latent space, with paired affine
/// decoders. Row-vector convention: z = x W + b.
struct AlignmentNetwork {
  MatrixXd enc_collab_w, enc_collab_b;  // d x k, 1 x k
  MatrixXd enc_sem_w, enc_sem_b;        // 768 x k, 1 x k
  MatrixXd dec_collab_w, dec_collab_b;  // k x d, 1 x d
  MatrixXd dec_sem_w, dec_sem_b;        // k x 768, 1 x 768
  double alpha = 0.5;
  double beta = 0.2;

  int collab_dim() const { return static_cast<int>(enc_collab_w.rows()); }
  int semantic_dim() const { return static_cast<int>(enc_sem_w.rows()); }
  int latent_dim() const { return static_cast<int>(enc_collab_w.cols()); }

  TensorList tensors();
  AlignmentNetwork zeros_like() const;
  std::string digest() const;
  void validate() const;

  Checkpoint to_checkpoint() const;
  static AlignmentNetwork from_checkpoint(const Checkpoint& ckpt);
};

AlignmentNetwork init_alignment_network(int collab_dim, Rng& rng, double alpha = 0.5,
                                        double beta = 0.2, int semantic_dim = kSemanticDim,
                                        int latent_dim = kLatentDim);

VectorXd encode(const AlignmentNetwork& net, Modality modality, const VectorXd& input);
VectorXd decode(const AlignmentNetwork& net, Modality modality, const VectorXd& latent);

/// Items of one user sequence, one row per item.
struct AlignmentGroup {
  MatrixXd collab;    // n x d
  MatrixXd semantic;  // n x 768
};

/// Rows are (x^p, e_{q+}, e_{q-}) triples.
struct RecommendationTriples {
  MatrixXd users;
  MatrixXd positives;
  MatrixXd negatives;

  Eigen::Index size() const { return users.rows(); }
};

struct AlignmentBatch {
  std::vector<AlignmentGroup> groups;
  RecommendationTriples triples;
};

/// Probability clamp applied before logs in the recommendation loss.
inline constexpr double kProbabilityClamp = 1e-7;

/// Mean over groups of the mean squared latent gap within each group.
double alignment_loss(const AlignmentNetwork& net, std::span<const AlignmentGroup> groups,
                      AlignmentNetwork* grads = nullptr);

double item_reconstruction_loss(const AlignmentNetwork& net,
                                std::span<const AlignmentGroup> groups,
                                AlignmentNetwork* grads = nullptr, double weight = 1.0);

double text_reconstruction_loss(const AlignmentNetwork& net,
                                std::span<const AlignmentGroup> groups,
                                AlignmentNetwork* grads = nullptr, double weight = 1.0);

/// alpha * item reconstruction + beta * text reconstruction.
double reconstruction_loss(const AlignmentNetwork& net, std::span<const AlignmentGroup> groups,
                           AlignmentNetwork* grads = nullptr);

/// -sum [log s(x . dec(enc(e+))) + log(1 - s(x . dec(enc(e-))))], probabilities
/// clamped to [1e-7, 1 - 1e-7].
double recommendation_loss(const AlignmentNetwork& net, const RecommendationTriples& triples,
                           AlignmentNetwork* grads = nullptr);

struct LossBreakdown {
  double align = 0.0;
  double reconstruction = 0.0;
  double recommendation = 0.0;
  double total() const { return align + reconstruction + recommendation; }
};

/// Unit-weighted sum of the three terms. Empty group lists contribute zero.
LossBreakdown total_loss(const AlignmentNetwork& net, const AlignmentBatch& batch,
                         AlignmentNetwork* grads = nullptr);

using AlignmentGradientFn =
    std::function<void(const AlignmentNetwork&, const AlignmentBatch&, AlignmentNetwork&)>;

/// Analytic gradient of total_loss.
void alignment_gradient(const AlignmentNetwork& net, const AlignmentBatch& batch,
                        AlignmentNetwork& grads);

/// Worst relative error between `gradient` (analytic by default) and central
/// differences of total_loss over every parameter.
double gradient_check(const AlignmentNetwork& net, const AlignmentBatch& batch,
                      const AlignmentGradientFn& gradient = alignment_gradient,
                      double step = 1e-5);

/// One user sequence worth of training signal.
struct AlignmentExample {
  AlignmentGroup group;
  bool has_triple = false;
  VectorXd user, positive, negative;
};

AlignmentBatch make_batch(std::span<const AlignmentExample> examples);

struct AlignmentTrainConfig {
  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 1e-4;
  OptimizerKind optimizer = OptimizerKind::kSgd;
};

struct AlignmentTrainResult {
  AlignmentNetwork net;
  std::vector<LossBreakdown> epoch_losses;  // full-dataset losses after each epoch
  LossBreakdown initial_loss;
};

AlignmentTrainResult train_alignment(AlignmentNetwork net,
                                     std::span<const AlignmentExample> dataset,
                                     const AlignmentTrainConfig& config, Rng& rng);

enum class EmbeddingSource { kCollaborativePath, kSemanticPath };

std::string to_string(EmbeddingSource source);

struct UnifiedEmbedding {
  std::string item;
  VectorXd vector;
  EmbeddingSource source = EmbeddingSource::kCollaborativePath;
};

/// f_I(e_q) for items the CF model was trained on, f_T(Q_q) otherwise.
UnifiedEmbedding unified_item_embedding(const AlignmentNetwork& net, const std::string& item_id,
                                        const CfModel& cf, const SemanticStore& semantics);

/// dec_collab(f_T(Q)): a collaborative-space stand-in for an item the CF model
/// has never seen.
VectorXd semantic_standin(const AlignmentNetwork& net, const VectorXd& semantic);

}  // namespace cotrec
