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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cotrec/cot.h"
#include "cotrec/io.h"
#include "cotrec/nn.h"

namespace cotrec {

inline constexpr int kTokenDim = 256;
inline constexpr int kProjectionHidden = 128;

/// affine -> relu -> affine, row-vector convention.
struct Mlp {
  MatrixXd w1, b1, w2, b2;

  int in_dim() const { return static_cast<int>(w1.rows()); }
  int out_dim() const { return static_cast<int>(w2.cols()); }

  /// Rows of `x` are independent inputs.
  MatrixXd forward(const MatrixXd& x, MatrixXd* hidden_pre = nullptr) const;
  /// Accumulates parameter gradients into `grads`.
  void backward(const MatrixXd& x, const MatrixXd& hidden_pre, const MatrixXd& dy,
                Mlp& grads) const;
};

/// F_X (user), F_Z (unified item latent) and F_r (CoT embedding) into token space.
struct ProjectionStack {
  Mlp user, item, cot;

  int token_dim() const { return user.out_dim(); }
  TensorList tensors();
  ProjectionStack zeros_like() const;
  std::string digest() const;

  Checkpoint to_checkpoint() const;
  static ProjectionStack from_checkpoint(const Checkpoint& ckpt);
};

struct ProjectionDims {
  int collab_dim = 50;
  int latent_dim = 128;
  int semantic_dim = 768;
  int token_dim = kTokenDim;
  int hidden = kProjectionHidden;
};

ProjectionStack init_projection_stack(const ProjectionDims& dims, Rng& rng);
ProjectionStack zero_projection_stack(const ProjectionDims& dims);

/// Embedding of a retained CoT with its composite score carried as metadata.
struct CotSignal {
  VectorXd embedding;
  double score = 0.0;
};

struct ProjectedComponents {
  VectorXd o_x;
  VectorXd o_z;
  std::optional<VectorXd> o_r;
};

/// Throws ContractError on dimension mismatch. A null `cot` omits O_r.
ProjectedComponents project_components(const ProjectionStack& stack, const VectorXd& x_user,
                                       const VectorXd& z_item, const CotSignal* cot);

struct Segment {
  enum class Kind { kText, kSoft };
  Kind kind = Kind::kText;
  std::string name;  // soft segments: "O_X", "O_Z", "O_r"
  std::string text;
  VectorXd vector;
  int candidate = -1;  // O_Z segments: index of their candidate
};

struct PromptBundle {
  std::vector<Segment> segments;
  std::size_t soft_count() const;
};

struct PromptTemplates {
  std::string instruction =
      "Here is a user and candidate items, each followed by its item token.";
  std::string query = "Which item will the user interact with next?";
};

/// [O_X] instruction (title, [O_Z])... [O_r] query, candidates in input order.
PromptBundle assemble_prompt(const VectorXd& o_x,
                             std::span<const std::pair<std::string, VectorXd>> candidates,
                             const std::optional<VectorXd>& o_r,
                             const PromptTemplates& templates = {});

/// Soft segments become `<SOFT:name:base64(float32 little-endian)>`.
std::string render_bundle(const PromptBundle& bundle);
std::string encode_soft_vector(const VectorXd& v);
VectorXd decode_soft_vector(std::string_view base64);

class VocabularyError : public DataError {
 public:
  explicit VocabularyError(const std::string& token)
      : DataError("token '" + token + "' is not in the surrogate vocabulary") {}
};

/// Lowercased title tokens of every catalog entry, sorted and de-duplicated.
std::vector<std::string> build_vocabulary(const Catalog& catalog);

/// Frozen stand-in for a language model: seeded token lookup plus an affine map
/// from token space to vocabulary logits.
class SurrogateHead {
 public:
  SurrogateHead(std::vector<std::string> vocabulary, int token_dim, std::uint64_t seed);

  /// Head whose output map is identically zero (uniform predictions).
  static SurrogateHead uniform(std::vector<std::string> vocabulary, int token_dim,
                               std::uint64_t seed);

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  int token_dim() const { return static_cast<int>(embeddings_.cols()); }
  std::optional<int> index_of(std::string_view token) const;
  /// Vocabulary tokens use the frozen table; others a seeded hash vector.
  VectorXd token_embedding(std::string_view token) const;
  /// Mean token embedding of `text`, zero when it has no tokens.
  VectorXd text_embedding(std::string_view text) const;
  const MatrixXd& output_weight() const { return output_weight_; }  // token_dim x |V|
  const MatrixXd& output_bias() const { return output_bias_; }      // 1 x |V|
  std::uint64_t seed() const { return seed_; }
  std::string digest() const;

 private:
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, int> index_;
  MatrixXd embeddings_;  // |V| x token_dim
  MatrixXd output_weight_;
  MatrixXd output_bias_;
  std::uint64_t seed_;
};

/// Negative mean log-likelihood of `target_tokens` under the head, with
/// context = mean segment vector + mean embedded target prefix. When
/// `segment_grads` is given it receives dL/d(vector) for every segment.
double surrogate_lm_loss(const PromptBundle& bundle, std::span<const std::string> target_tokens,
                         const SurrogateHead& head,
                         std::vector<VectorXd>* segment_grads = nullptr);

/// Mean log-likelihood of each candidate's title tokens in one shared context.
std::vector<double> candidate_log_likelihoods(const PromptBundle& bundle,
                                              std::span<const std::vector<std::string>> titles,
                                              const SurrogateHead& head);

struct ProjectionCandidate {
  std::string item;
  std::string title;
  VectorXd latent;  // unified item embedding
};

struct ProjectionExample {
  VectorXd user;
  std::vector<ProjectionCandidate> candidates;  // positive included
  std::optional<CotSignal> cot;
  std::vector<std::string> target_tokens;  // the positive's title tokens
};

PromptBundle build_bundle(const ProjectionStack& stack, const VectorXd& user,
                          std::span<const ProjectionCandidate> candidates,
                          const CotSignal* cot, const PromptTemplates& templates = {});

/// Surrogate loss of one example; accumulates stack gradients into `grads`.
double projection_loss(const ProjectionStack& stack, const ProjectionExample& example,
                       const SurrogateHead& head, ProjectionStack* grads = nullptr);

/// Worst relative error of the analytic stack gradient of the mean loss.
double projection_gradient_check(const ProjectionStack& stack,
                                 std::span<const ProjectionExample> examples,
                                 const SurrogateHead& head, double step = 1e-5);

struct ProjectionTrainConfig {
  int epochs = 5;
  int batch_size = 4;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::kAdam;
};

struct ProjectionTrainResult {
  ProjectionStack stack;
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  // mean loss over the dataset after each epoch
};

ProjectionTrainResult train_projections(ProjectionStack stack,
                                        std::span<const ProjectionExample> dataset,
                                        const ProjectionTrainConfig& config,
                                        const SurrogateHead& head, Rng& rng);

struct RankedCandidate {
  std::string item;
  double score = 0.0;
};

/// Descending mean title log-likelihood; ties by item id.
std::vector<RankedCandidate> rank_candidates(const ProjectionStack& stack,
                                             const SurrogateHead& head, const VectorXd& user,
                                             const CotSignal* cot,
                                             std::span<const ProjectionCandidate> candidates);

/// Separates the predicted title from the explanation in single-pass replies.
inline constexpr std::string_view kExplanationDelimiter = "<|explanation|>";

struct ExplanationReply {
  std::string predicted_title;
  std::string explanation;
};

/// One adapter call. Fixture adapters return the stored explanation; remote
/// replies must contain kExplanationDelimiter.
ExplanationReply request_explanation(const ProjectionStack& stack, const VectorXd& z_item,
                                     const CotSignal* cot, const PromptBundle& prompt,
                                     GenerationAdapter& adapter, const std::string& user,
                                     const std::string& item);

}  // namespace cotrec
