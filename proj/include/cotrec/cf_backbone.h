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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cotrec/data.h"
#include "cotrec/io.h"
#include "cotrec/nn.h"
#include "cotrec/rng.h"

namespace cotrec {

struct CfConfig {
  int embed_dim = 50;
  int max_history = 50;
  int blocks = 2;
  int heads = 1;
  double dropout = 0.0;
  int epochs = 20;
  int batch_size = 32;  // training groups per optimizer step
  double learning_rate = 1e-3;

  void validate() const;
};

struct AttentionBlock {
  MatrixXd ln1_gain, ln1_bias;
  MatrixXd wq, bq, wk, bk, wv, bv, wo, bo;
  MatrixXd ln2_gain, ln2_bias;
  MatrixXd w1, b1, w2, b2;
};

/// All trainable tensors of the self-attention recommender.
struct CfParameters {
  MatrixXd item_embeddings;  // |Q| x d, row q is the collaborative embedding
  MatrixXd positions;        // max_history x d
  std::vector<AttentionBlock> blocks;
  MatrixXd final_gain, final_bias;

  TensorList tensors();
  CfParameters zeros_like() const;
};

CfParameters init_cf_parameters(const CfConfig& config, int num_items, Rng& rng);

struct BlockCache {
  MatrixXd input;
  LayerNormCache ln1;
  MatrixXd attn_in;
  MatrixXd query, key, value;
  std::vector<MatrixXd> probs;  // per head, L x L (upper triangle zero)
  MatrixXd heads_out;
  MatrixXd residual;
  LayerNormCache ln2;
  MatrixXd ffn_in;
  MatrixXd hidden_pre;
  MatrixXd hidden;
  MatrixXd hidden_mask;
};

struct CfForwardCache {
  MatrixXd input_mask;
  std::vector<BlockCache> blocks;
  LayerNormCache final_ln;
};

/// Runs the causal attention stack over L x d item vectors (positions are
/// assigned 0..L-1 from the start of the window). Returns L x d outputs; row i
/// depends only on inputs 0..i. Dropout is applied only when `dropout_rng` is set.
MatrixXd cf_forward(const CfParameters& params, const CfConfig& config,
                    const MatrixXd& item_vectors, CfForwardCache* cache,
                    Rng* dropout_rng = nullptr);

/// Backpropagates dL/d(outputs) into `grads` (accumulating). If `d_item_vectors`
/// is set it receives dL/d(item_vectors).
void cf_backward(const CfParameters& params, const CfConfig& config,
                 const CfForwardCache& cache, const MatrixXd& d_outputs,
                 CfParameters& grads, MatrixXd* d_item_vectors = nullptr);

struct CfTarget {
  int position = 0;
  int candidate = 0;
  int label = 0;
};

/// Instances sharing a user and a history window prefix, evaluated with a
/// single causal forward pass over `window`.
struct CfTrainingGroup {
  int user = 0;
  std::vector<int> window;
  std::vector<CfTarget> targets;
};

std::vector<CfTrainingGroup> group_instances(std::span<const TrainingInstance> instances,
                                             int max_history);

/// Mean binary cross-entropy of sigmoid(x_k . E_q) over all targets in
/// `groups`. Accumulates gradients into `grads` when non-null.
double cf_loss(const CfParameters& params, const CfConfig& config,
               std::span<const CfTrainingGroup> groups, CfParameters* grads,
               Rng* dropout_rng = nullptr);

/// Worst relative error between analytic and central-difference gradients of
/// cf_loss over every parameter entry.
double cf_gradient_check(const CfParameters& params, const CfConfig& config,
                         std::span<const CfTrainingGroup> groups, double step = 1e-5);

class CfModel {
 public:
  CfModel(CfConfig config, std::vector<std::string> item_ids, CfParameters params,
          std::vector<bool> trained_items);

  const CfConfig& config() const { return config_; }
  const CfParameters& parameters() const { return params_; }
  bool frozen() const { return frozen_; }
  int num_items() const { return static_cast<int>(item_ids_.size()); }
  const std::vector<std::string>& item_ids() const { return item_ids_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  /// True when the item took part in training.
  bool knows(int item) const;
  std::optional<int> index_of(const std::string& item_id) const;

  /// Collaborative embedding of a trained item; nullopt marks a cold item.
  std::optional<VectorXd> item_embedding(int item) const;
  std::optional<VectorXd> item_embedding(const std::string& item_id) const;

  /// Final-position output over the most recent max_history items.
  VectorXd user_representation(std::span<const int> history) const;

  /// As user_representation, with caller-supplied d-dim item vectors (used
  /// when some history items only have a semantic stand-in embedding).
  VectorXd user_representation_from_vectors(const MatrixXd& item_vectors) const;

  /// x . E_q for every item q.
  VectorXd next_item_scores(std::span<const int> history) const;
  VectorXd score_items(const VectorXd& user) const;

  std::string digest() const;

  Checkpoint to_checkpoint() const;
  static CfModel from_checkpoint(const Checkpoint& ckpt);

 private:
  friend CfModel train_cf(std::span<const TrainingInstance>, const CfConfig&, int,
                          std::vector<std::string>, Rng&);

  CfConfig config_;
  std::vector<std::string> item_ids_;
  CfParameters params_;
  std::vector<bool> trained_;
  std::vector<double> epoch_losses_;
  bool frozen_ = true;
};

/// Trains from seeded initialization with Adam on cf_loss and returns a frozen
/// model. Zero epochs returns the initialization.
CfModel train_cf(std::span<const TrainingInstance> instances, const CfConfig& config,
                 int num_items, std::vector<std::string> item_ids, Rng& rng);

/// softmax(scores), for prior calibration.
VectorXd softmax(const VectorXd& scores);

/// Mid-rank percentile of scores[candidate]: (#lower + #equal / 2) / N.
double score_percentile(const VectorXd& scores, int candidate);

/// "likelihood P%" with P = 100 * value rounded half down.
std::string verbalize_prior(double calibrated);

/// Item indices sorted by score descending, ties by index ascending.
std::vector<int> rank_by_score(const VectorXd& scores);

}  // namespace cotrec
