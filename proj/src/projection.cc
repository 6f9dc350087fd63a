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

#include "cotrec/projection.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>

#include "cotrec/errors.h"
#include "cotrec/text.h"

namespace cotrec {

MatrixXd Mlp::forward(const MatrixXd& x, MatrixXd* hidden_pre) const {
  if (x.cols() != w1.rows()) {
    throw ContractError("mlp input has dimension " + std::to_string(x.cols()) + ", expected " +
                        std::to_string(w1.rows()));
  }
  MatrixXd pre = linear_forward(x, w1, b1);
  MatrixXd y = linear_forward(pre.cwiseMax(0.0), w2, b2);
  if (hidden_pre) *hidden_pre = std::move(pre);
  return y;
}

void Mlp::backward(const MatrixXd& x, const MatrixXd& hidden_pre, const MatrixXd& dy,
                   Mlp& grads) const {
  MatrixXd dh = linear_backward(dy, hidden_pre.cwiseMax(0.0), w2, grads.w2, grads.b2);
  dh = dh.array() * (hidden_pre.array() > 0.0).cast<double>();
  linear_backward(dh, x, w1, grads.w1, grads.b1);
}

TensorList ProjectionStack::tensors() {
  TensorList out;
  for (auto [prefix, mlp] : {std::pair<const char*, Mlp*>{"user", &user}, {"item", &item},
                             {"cot", &cot}}) {
    const std::string p(prefix);
    out.emplace_back(p + ".w1", &mlp->w1);
    out.emplace_back(p + ".b1", &mlp->b1);
    out.emplace_back(p + ".w2", &mlp->w2);
    out.emplace_back(p + ".b2", &mlp->b2);
  }
  return out;
}

ProjectionStack ProjectionStack::zeros_like() const {
  ProjectionStack z = *this;
  zero_tensors(z.tensors());
  return z;
}

std::string ProjectionStack::digest() const {
  ProjectionStack copy = *this;
  Digest dg;
  for (const auto& [name, t] : copy.tensors()) dg.update(name).update(*t);
  return dg.hex();
}

Checkpoint ProjectionStack::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "projection_stack";
  ProjectionStack copy = *this;
  for (const auto& [name, t] : copy.tensors()) ckpt.add_tensor(name, *t);
  return ckpt;
}

ProjectionStack ProjectionStack::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "projection_stack") {
    throw DataError("not a projection_stack checkpoint: " + ckpt.kind);
  }
  ProjectionStack stack;
  for (const auto& [name, t] : stack.tensors()) *t = ckpt.tensor(name);
  const int d = stack.token_dim();
  if (stack.item.out_dim() != d || stack.cot.out_dim() != d) {
    throw DataError("projection checkpoint has inconsistent output dimensions");
  }
  return stack;
}

namespace {

Mlp make_mlp(int in, int hidden, int out, Rng* rng) {
  Mlp m;
  if (rng) {
    m.w1 = random_normal(in, hidden, std::sqrt(2.0 / in), *rng);
    m.w2 = random_normal(hidden, out, 1.0 / std::sqrt(hidden), *rng);
  } else {
    m.w1 = MatrixXd::Zero(in, hidden);
    m.w2 = MatrixXd::Zero(hidden, out);
  }
  m.b1 = MatrixXd::Zero(1, hidden);
  m.b2 = MatrixXd::Zero(1, out);
  return m;
}

void check_dims(const ProjectionDims& d) {
  if (d.collab_dim < 1 || d.latent_dim < 1 || d.semantic_dim < 1 || d.token_dim < 1 ||
      d.hidden < 1) {
    throw ConfigError("projection dimensions must be positive");
  }
}

}  // namespace

ProjectionStack init_projection_stack(const ProjectionDims& dims, Rng& rng) {
  check_dims(dims);
  ProjectionStack s;
  s.user = make_mlp(dims.collab_dim, dims.hidden, dims.token_dim, &rng);
  s.item = make_mlp(dims.latent_dim, dims.hidden, dims.token_dim, &rng);
  s.cot = make_mlp(dims.semantic_dim, dims.hidden, dims.token_dim, &rng);
  return s;
}

ProjectionStack zero_projection_stack(const ProjectionDims& dims) {
  check_dims(dims);
  ProjectionStack s;
  s.user = make_mlp(dims.collab_dim, dims.hidden, dims.token_dim, nullptr);
  s.item = make_mlp(dims.latent_dim, dims.hidden, dims.token_dim, nullptr);
  s.cot = make_mlp(dims.semantic_dim, dims.hidden, dims.token_dim, nullptr);
  return s;
}

ProjectedComponents project_components(const ProjectionStack& stack, const VectorXd& x_user,
                                       const VectorXd& z_item, const CotSignal* cot) {
  ProjectedComponents out;
  out.o_x = stack.user.forward(x_user.transpose()).transpose();
  out.o_z = stack.item.forward(z_item.transpose()).transpose();
  if (cot) out.o_r = stack.cot.forward(cot->embedding.transpose()).transpose();
  return out;
}

std::size_t PromptBundle::soft_count() const {
  return static_cast<std::size_t>(std::count_if(segments.begin(), segments.end(), [](const Segment& s) {
    return s.kind == Segment::Kind::kSoft;
  }));
}

PromptBundle assemble_prompt(const VectorXd& o_x,
                             std::span<const std::pair<std::string, VectorXd>> candidates,
                             const std::optional<VectorXd>& o_r,
                             const PromptTemplates& templates) {
  if (candidates.empty()) throw ContractError("assemble_prompt: no candidates");
  PromptBundle b;
  auto soft = [&](const char* name, const VectorXd& v, int cand) {
    Segment s;
    s.kind = Segment::Kind::kSoft;
    s.name = name;
    s.vector = v;
    s.candidate = cand;
    b.segments.push_back(std::move(s));
  };
  auto text = [&](const std::string& t) {
    Segment s;
    s.text = t;
    b.segments.push_back(std::move(s));
  };
  soft("O_X", o_x, -1);
  text(templates.instruction);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].second.size() != o_x.size()) {
      throw ContractError("assemble_prompt: soft vectors must share one token dimension");
    }
    text(candidates[i].first);
    soft("O_Z", candidates[i].second, static_cast<int>(i));
  }
  if (o_r) soft("O_r", *o_r, -1);
  text(templates.query);
  return b;
}

namespace {

constexpr char kBase64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    std::uint32_t chunk = static_cast<std::uint32_t>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) chunk |= static_cast<std::uint32_t>(bytes[i + 1]) << 8;
    if (i + 2 < bytes.size()) chunk |= bytes[i + 2];
    out += kBase64[(chunk >> 18) & 63];
    out += kBase64[(chunk >> 12) & 63];
    out += i + 1 < bytes.size() ? kBase64[(chunk >> 6) & 63] : '=';
    out += i + 2 < bytes.size() ? kBase64[chunk & 63] : '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw DataError("base64 length is not a multiple of 4");
  std::vector<unsigned char> out;
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t chunk = 0;
    int pad = 0;
    for (int k = 0; k < 4; ++k) {
      const char c = text[i + k];
      chunk <<= 6;
      if (c == '=') {
        ++pad;
        continue;
      }
      const char* pos = std::strchr(kBase64, c);
      if (!pos || c == '\0') throw DataError("invalid base64 character");
      chunk |= static_cast<std::uint32_t>(pos - kBase64);
    }
    out.push_back(static_cast<unsigned char>(chunk >> 16));
    if (pad < 2) out.push_back(static_cast<unsigned char>(chunk >> 8));
    if (pad < 1) out.push_back(static_cast<unsigned char>(chunk));
  }
  return out;
}

}  // namespace

std::string encode_soft_vector(const VectorXd& v) {
  std::vector<unsigned char> bytes;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const float f = static_cast<float>(v(i));
    std::uint32_t bits;
    std::memcpy(&bits, &f, sizeof(bits));
    for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<unsigned char>(bits >> (8 * k)));
  }
  return base64_encode(bytes);
}

VectorXd decode_soft_vector(std::string_view base64) {
  const std::vector<unsigned char> bytes = base64_decode(base64);
  if (bytes.size() % 4 != 0) throw DataError("soft vector byte count is not a multiple of 4");
  VectorXd v(static_cast<Eigen::Index>(bytes.size() / 4));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(bytes[4 * i + k]) << (8 * k);
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    v(i) = f;
  }
  return v;
}

std::string render_bundle(const PromptBundle& bundle) {
  std::string out;
  for (std::size_t i = 0; i < bundle.segments.size(); ++i) {
    const Segment& s = bundle.segments[i];
    if (i) out += '\n';
    if (s.kind == Segment::Kind::kText) {
      out += s.text;
    } else {
      out += "<SOFT:" + s.name + ":" + encode_soft_vector(s.vector) + ">";
    }
  }
  return out;
}

std::vector<std::string> build_vocabulary(const Catalog& catalog) {
  std::set<std::string> tokens;
  for (const auto& [id, entry] : catalog) {
    for (std::string& t : word_tokens(entry.title)) tokens.insert(std::move(t));
  }
  return {tokens.begin(), tokens.end()};
}

SurrogateHead::SurrogateHead(std::vector<std::string> vocabulary, int token_dim,
                             std::uint64_t seed)
    : vocabulary_(std::move(vocabulary)), seed_(seed) {
  if (vocabulary_.empty()) throw ContractError("surrogate head needs a non-empty vocabulary");
  if (token_dim < 1) throw ConfigError("token dimension must be positive");
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (!index_.emplace(vocabulary_[i], static_cast<int>(i)).second) {
      throw ContractError("duplicate vocabulary token '" + vocabulary_[i] + "'");
    }
  }
  const auto v = static_cast<Eigen::Index>(vocabulary_.size());
  Rng rng(seed);
  Rng table_rng = rng.fork(1);
  Rng out_rng = rng.fork(2);
  embeddings_ = random_normal(v, token_dim, 1.0, table_rng);
  output_weight_ = random_normal(token_dim, v, 1.0 / std::sqrt(token_dim), out_rng);
  output_bias_ = MatrixXd::Zero(1, v);
}

SurrogateHead SurrogateHead::uniform(std::vector<std::string> vocabulary, int token_dim,
                                     std::uint64_t seed) {
  SurrogateHead head(std::move(vocabulary), token_dim, seed);
  head.output_weight_.setZero();
  return head;
}

std::optional<int> SurrogateHead::index_of(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

VectorXd SurrogateHead::token_embedding(std::string_view token) const {
  if (auto idx = index_of(token)) return embeddings_.row(*idx).transpose();
  Digest dg;
  dg.update(token);
  Rng rng(seed_ ^ dg.value());
  return random_normal(token_dim(), 1, 1.0, rng);
}

VectorXd SurrogateHead::text_embedding(std::string_view text) const {
  VectorXd sum = VectorXd::Zero(token_dim());
  const std::vector<std::string> tokens = word_tokens(text);
  for (const std::string& t : tokens) sum += token_embedding(t);
  if (!tokens.empty()) sum /= static_cast<double>(tokens.size());
  return sum;
}

std::string SurrogateHead::digest() const {
  Digest dg;
  for (const auto& t : vocabulary_) dg.update(t).update("\n");
  dg.update(embeddings_).update(output_weight_).update(output_bias_);
  return dg.hex();
}

namespace {

VectorXd segment_mean(const PromptBundle& bundle, const SurrogateHead& head) {
  if (bundle.segments.empty()) throw ContractError("empty prompt bundle");
  VectorXd sum = VectorXd::Zero(head.token_dim());
  for (const Segment& s : bundle.segments) {
    if (s.kind == Segment::Kind::kText) {
      sum += head.text_embedding(s.text);
    } else {
      if (s.vector.size() != head.token_dim()) {
        throw ContractError("soft segment dimension differs from the head's token dimension");
      }
      sum += s.vector;
    }
  }
  return sum / static_cast<double>(bundle.segments.size());
}

std::vector<int> target_indices(std::span<const std::string> tokens, const SurrogateHead& head) {
  if (tokens.empty()) throw ContractError("empty target token list");
  std::vector<int> out;
  for (const std::string& t : tokens) {
    auto idx = head.index_of(t);
    if (!idx) throw VocabularyError(t);
    out.push_back(*idx);
  }
  return out;
}

VectorXd log_softmax(const VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

// Mean log-likelihood of `targets`; optionally dL/dcontext summed over steps
// for L = -mean log-likelihood.
double sequence_log_likelihood(const VectorXd& context, std::span<const std::string> tokens,
                               const std::vector<int>& targets, const SurrogateHead& head,
                               VectorXd* d_context) {
  const MatrixXd& w = head.output_weight();
  const auto t = static_cast<double>(targets.size());
  VectorXd prefix_sum = VectorXd::Zero(head.token_dim());
  double total = 0.0;
  if (d_context) d_context->setZero(head.token_dim());
  for (std::size_t j = 0; j < targets.size(); ++j) {
    VectorXd ctx = context;
    if (j > 0) ctx += prefix_sum / static_cast<double>(j);
    const VectorXd logits = (ctx.transpose() * w + head.output_bias()).transpose();
    const VectorXd logp = log_softmax(logits);
    total += logp(targets[j]);
    if (d_context) {
      VectorXd d_logits = logp.array().exp();
      d_logits(targets[j]) -= 1.0;
      *d_context += w * d_logits / t;
    }
    prefix_sum += head.token_embedding(tokens[j]);
  }
  return total / t;
}

}  // namespace

double surrogate_lm_loss(const PromptBundle& bundle, std::span<const std::string> target_tokens,
                         const SurrogateHead& head, std::vector<VectorXd>* segment_grads) {
  const std::vector<int> targets = target_indices(target_tokens, head);
  const VectorXd context = segment_mean(bundle, head);
  VectorXd d_context;
  const double ll = sequence_log_likelihood(context, target_tokens, targets, head,
                                            segment_grads ? &d_context : nullptr);
  if (segment_grads) {
    const VectorXd per_segment = d_context / static_cast<double>(bundle.segments.size());
    segment_grads->assign(bundle.segments.size(), per_segment);
  }
  return -ll;
}

std::vector<double> candidate_log_likelihoods(const PromptBundle& bundle,
                                              std::span<const std::vector<std::string>> titles,
                                              const SurrogateHead& head) {
  const VectorXd context = segment_mean(bundle, head);
  std::vector<double> out;
  for (const auto& title : titles) {
    out.push_back(sequence_log_likelihood(context, title, target_indices(title, head), head,
                                          nullptr));
  }
  return out;
}

namespace {

struct StackForward {
  MatrixXd user_in, user_pre, user_out;
  MatrixXd item_in, item_pre, item_out;
  MatrixXd cot_in, cot_pre, cot_out;
  bool has_cot = false;
};

StackForward forward_stack(const ProjectionStack& stack, const VectorXd& user,
                           std::span<const ProjectionCandidate> candidates, const CotSignal* cot) {
  if (candidates.empty()) throw ContractError("projection example has no candidates");
  StackForward f;
  f.user_in = user.transpose();
  f.user_out = stack.user.forward(f.user_in, &f.user_pre);
  f.item_in.resize(static_cast<Eigen::Index>(candidates.size()), stack.item.in_dim());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].latent.size() != stack.item.in_dim()) {
      throw ContractError("candidate latent has dimension " +
                          std::to_string(candidates[i].latent.size()));
    }
    f.item_in.row(static_cast<Eigen::Index>(i)) = candidates[i].latent.transpose();
  }
  f.item_out = stack.item.forward(f.item_in, &f.item_pre);
  if (cot) {
    f.has_cot = true;
    f.cot_in = cot->embedding.transpose();
    f.cot_out = stack.cot.forward(f.cot_in, &f.cot_pre);
  }
  return f;
}

PromptBundle bundle_from(const StackForward& f, std::span<const ProjectionCandidate> candidates,
                         const PromptTemplates& templates) {
  std::vector<std::pair<std::string, VectorXd>> cands;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cands.emplace_back(candidates[i].title,
                       f.item_out.row(static_cast<Eigen::Index>(i)).transpose());
  }
  std::optional<VectorXd> o_r;
  if (f.has_cot) o_r = f.cot_out.row(0).transpose();
  return assemble_prompt(f.user_out.row(0).transpose(), cands, o_r, templates);
}

}  // namespace

PromptBundle build_bundle(const ProjectionStack& stack, const VectorXd& user,
                          std::span<const ProjectionCandidate> candidates, const CotSignal* cot,
                          const PromptTemplates& templates) {
  return bundle_from(forward_stack(stack, user, candidates, cot), candidates, templates);
}

double projection_loss(const ProjectionStack& stack, const ProjectionExample& example,
                       const SurrogateHead& head, ProjectionStack* grads) {
  const CotSignal* cot = example.cot ? &*example.cot : nullptr;
  const StackForward f = forward_stack(stack, example.user, example.candidates, cot);
  const PromptBundle bundle = bundle_from(f, example.candidates, {});
  std::vector<VectorXd> seg_grads;
  const double loss =
      surrogate_lm_loss(bundle, example.target_tokens, head, grads ? &seg_grads : nullptr);
  if (grads) {
    MatrixXd d_user = MatrixXd::Zero(1, stack.token_dim());
    MatrixXd d_item = MatrixXd::Zero(f.item_out.rows(), stack.token_dim());
    MatrixXd d_cot = MatrixXd::Zero(1, stack.token_dim());
    for (std::size_t i = 0; i < bundle.segments.size(); ++i) {
      const Segment& s = bundle.segments[i];
      if (s.kind != Segment::Kind::kSoft) continue;
      if (s.name == "O_X") d_user.row(0) += seg_grads[i].transpose();
      if (s.name == "O_Z") d_item.row(s.candidate) += seg_grads[i].transpose();
      if (s.name == "O_r") d_cot.row(0) += seg_grads[i].transpose();
    }
    stack.user.backward(f.user_in, f.user_pre, d_user, grads->user);
    stack.item.backward(f.item_in, f.item_pre, d_item, grads->item);
    if (f.has_cot) stack.cot.backward(f.cot_in, f.cot_pre, d_cot, grads->cot);
  }
  return loss;
}

namespace {

double mean_loss(const ProjectionStack& stack, std::span<const ProjectionExample> examples,
                 const SurrogateHead& head, ProjectionStack* grads) {
  if (examples.empty()) throw ContractError("empty projection batch");
  ProjectionStack local;
  if (grads) local = stack.zeros_like();
  double total = 0.0;
  for (const auto& ex : examples) total += projection_loss(stack, ex, head, grads ? &local : nullptr);
  const double inv = 1.0 / static_cast<double>(examples.size());
  if (grads) {
    auto src = local.tensors();
    auto dst = grads->tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i].second += inv * *src[i].second;
  }
  return total * inv;
}

}  // namespace

double projection_gradient_check(const ProjectionStack& stack,
                                 std::span<const ProjectionExample> examples,
                                 const SurrogateHead& head, double step) {
  ProjectionStack probe = stack;
  ProjectionStack grads = stack.zeros_like();
  mean_loss(probe, examples, head, &grads);
  return max_gradient_error(probe.tensors(), grads.tensors(),
                            [&] { return mean_loss(probe, examples, head, nullptr); }, step);
}

ProjectionTrainResult train_projections(ProjectionStack stack,
                                        std::span<const ProjectionExample> dataset,
                                        const ProjectionTrainConfig& config,
                                        const SurrogateHead& head, Rng& rng) {
  if (config.epochs < 0 || config.batch_size < 1 || !(config.learning_rate >= 0.0)) {
    throw ConfigError("invalid projection training configuration");
  }
  if (dataset.empty()) throw ContractError("train_projections: empty dataset");
  ProjectionTrainResult result;
  result.initial_loss = mean_loss(stack, dataset, head, nullptr);
  Optimizer opt(OptimizerConfig{config.optimizer, config.learning_rate});
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      std::vector<ProjectionExample> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + config.batch_size); ++i) {
        batch.push_back(dataset[order[i]]);
      }
      ProjectionStack grads = stack.zeros_like();
      const double loss = mean_loss(stack, batch, head, &grads);
      if (!std::isfinite(loss)) {
        throw TrainingError("projection training diverged at epoch " +
                            std::to_string(epoch + 1));
      }
      opt.step(stack.tensors(), grads.tensors());
    }
    result.epoch_losses.push_back(mean_loss(stack, dataset, head, nullptr));
    if (!std::isfinite(result.epoch_losses.back())) {
      throw TrainingError("projection training diverged at epoch " + std::to_string(epoch + 1));
    }
  }
  result.stack = std::move(stack);
  return result;
}

std::vector<RankedCandidate> rank_candidates(const ProjectionStack& stack,
                                             const SurrogateHead& head, const VectorXd& user,
                                             const CotSignal* cot,
                                             std::span<const ProjectionCandidate> candidates) {
  const PromptBundle bundle = build_bundle(stack, user, candidates, cot);
  std::vector<std::vector<std::string>> titles;
  for (const auto& c : candidates) titles.push_back(word_tokens(c.title));
  const std::vector<double> scores = candidate_log_likelihoods(bundle, titles, head);
  std::vector<RankedCandidate> ranked;
  for (std::size_t i = 0; i < candidates.size(); ++i) ranked.push_back({candidates[i].item, scores[i]});
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.item < b.item;
  });
  return ranked;
}

ExplanationReply request_explanation(const ProjectionStack& stack, const VectorXd& z_item,
                                     const CotSignal* cot, const PromptBundle& prompt,
                                     GenerationAdapter& adapter, const std::string& user,
                                     const std::string& item) {
  PromptBundle full = prompt;
  Segment z;
  z.kind = Segment::Kind::kSoft;
  z.name = "Z_EXPLAIN";
  z.vector = stack.item.forward(z_item.transpose()).transpose();
  full.segments.push_back(std::move(z));
  if (cot) {
    Segment r;
    r.kind = Segment::Kind::kSoft;
    r.name = "R_EXPLAIN";
    r.vector = stack.cot.forward(cot->embedding.transpose()).transpose();
    full.segments.push_back(std::move(r));
  }
  Segment ask;
  ask.text = "Name the recommended item title, then write " + std::string(kExplanationDelimiter) +
             " followed by a short explanation for the user.";
  full.segments.push_back(std::move(ask));
  const std::string reply = adapter.complete(user, item, nullptr, render_bundle(full));
  if (!adapter.single_pass_replies()) return {"", reply};
  const auto pos = reply.find(kExplanationDelimiter);
  if (pos == std::string::npos) {
    throw DataError("generation reply lacks the explanation delimiter " +
                    std::string(kExplanationDelimiter));
  }
  return {std::string(trim(std::string_view(reply).substr(0, pos))),
          std::string(trim(std::string_view(reply).substr(pos + kExplanationDelimiter.size())))};
}

}  // namespace cotrec
