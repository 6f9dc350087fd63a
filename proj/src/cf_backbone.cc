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

#include "cotrec/cf_backbone.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "cotrec/errors.h"

namespace cotrec {

void CfConfig::validate() const {
  if (embed_dim < 1) throw ConfigError("cf.embed_dim must be >= 1");
  if (heads < 1 || embed_dim % heads != 0) {
    throw ConfigError("cf.heads must divide cf.embed_dim");
  }
  if (max_history < 1) throw ConfigError("cf.max_history must be >= 1");
  if (blocks < 0) throw ConfigError("cf.blocks must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("cf.dropout must be in [0, 1)");
  if (epochs < 0) throw ConfigError("cf.epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("cf.batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw ConfigError("cf.learning_rate must be >= 0");
}

TensorList CfParameters::tensors() {
  TensorList list;
  list.emplace_back("item_embeddings", &item_embeddings);
  list.emplace_back("positions", &positions);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    AttentionBlock& blk = blocks[b];
    const std::string p = "block" + std::to_string(b) + ".";
    list.emplace_back(p + "ln1_gain", &blk.ln1_gain);
    list.emplace_back(p + "ln1_bias", &blk.ln1_bias);
    list.emplace_back(p + "wq", &blk.wq);
    list.emplace_back(p + "bq", &blk.bq);
    list.emplace_back(p + "wk", &blk.wk);
    list.emplace_back(p + "bk", &blk.bk);
    list.emplace_back(p + "wv", &blk.wv);
    list.emplace_back(p + "bv", &blk.bv);
    list.emplace_back(p + "wo", &blk.wo);
    list.emplace_back(p + "bo", &blk.bo);
    list.emplace_back(p + "ln2_gain", &blk.ln2_gain);
    list.emplace_back(p + "ln2_bias", &blk.ln2_bias);
    list.emplace_back(p + "w1", &blk.w1);
    list.emplace_back(p + "b1", &blk.b1);
    list.emplace_back(p + "w2", &blk.w2);
    list.emplace_back(p + "b2", &blk.b2);
  }
  list.emplace_back("final_gain", &final_gain);
  list.emplace_back("final_bias", &final_bias);
  return list;
}

CfParameters CfParameters::zeros_like() const {
  CfParameters z = *this;
  zero_tensors(z.tensors());
  return z;
}

CfParameters init_cf_parameters(const CfConfig& config, int num_items, Rng& rng) {
  config.validate();
  const int d = config.embed_dim;
  const double w_std = 1.0 / std::sqrt(static_cast<double>(d));
  CfParameters p;
  p.item_embeddings = random_normal(num_items, d, w_std, rng);
  p.positions = random_normal(config.max_history, d, w_std, rng);
  for (int b = 0; b < config.blocks; ++b) {
    AttentionBlock blk;
    blk.ln1_gain = MatrixXd::Ones(1, d);
    blk.ln1_bias = MatrixXd::Zero(1, d);
    blk.wq = random_normal(d, d, w_std, rng);
    blk.bq = MatrixXd::Zero(1, d);
    blk.wk = random_normal(d, d, w_std, rng);
    blk.bk = MatrixXd::Zero(1, d);
    blk.wv = random_normal(d, d, w_std, rng);
    blk.bv = MatrixXd::Zero(1, d);
    blk.wo = random_normal(d, d, w_std, rng);
    blk.bo = MatrixXd::Zero(1, d);
    blk.ln2_gain = MatrixXd::Ones(1, d);
    blk.ln2_bias = MatrixXd::Zero(1, d);
    blk.w1 = random_normal(d, d, w_std, rng);
    blk.b1 = MatrixXd::Zero(1, d);
    blk.w2 = random_normal(d, d, w_std, rng);
    blk.b2 = MatrixXd::Zero(1, d);
    p.blocks.push_back(std::move(blk));
  }
  p.final_gain = MatrixXd::Ones(1, d);
  p.final_bias = MatrixXd::Zero(1, d);
  return p;
}

namespace {

MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng* rng) {
  if (!rng || rate <= 0.0) return MatrixXd();
  MatrixXd mask(rows, cols);
  const double keep = 1.0 - rate;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      mask(r, c) = rng->uniform01() < keep ? 1.0 / keep : 0.0;
    }
  }
  return mask;
}

}  // namespace

MatrixXd cf_forward(const CfParameters& params, const CfConfig& config,
                    const MatrixXd& item_vectors, CfForwardCache* cache, Rng* dropout_rng) {
  const Eigen::Index len = item_vectors.rows();
  const int d = config.embed_dim;
  if (len < 1) throw ContractError("cf_forward: empty history");
  if (len > config.max_history) throw ContractError("cf_forward: window exceeds max_history");
  if (item_vectors.cols() != d) throw ContractError("cf_forward: item vector width != embed_dim");

  CfForwardCache local;
  CfForwardCache& c = cache ? *cache : local;
  c.blocks.assign(params.blocks.size(), BlockCache{});

  MatrixXd x = item_vectors + params.positions.topRows(len);
  c.input_mask = dropout_mask(len, d, config.dropout, dropout_rng);
  if (c.input_mask.size()) x = x.cwiseProduct(c.input_mask);

  const int heads = config.heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  for (std::size_t b = 0; b < params.blocks.size(); ++b) {
    const AttentionBlock& blk = params.blocks[b];
    BlockCache& bc = c.blocks[b];
    bc.input = x;
    bc.attn_in = layer_norm_forward(x, blk.ln1_gain, blk.ln1_bias, &bc.ln1);
    bc.query = linear_forward(bc.attn_in, blk.wq, blk.bq);
    bc.key = linear_forward(x, blk.wk, blk.bk);
    bc.value = linear_forward(x, blk.wv, blk.bv);
    bc.heads_out = MatrixXd::Zero(len, d);
    bc.probs.assign(heads, MatrixXd::Zero(len, len));
    for (int h = 0; h < heads; ++h) {
      auto q = bc.query.middleCols(h * dh, dh);
      auto k = bc.key.middleCols(h * dh, dh);
      auto v = bc.value.middleCols(h * dh, dh);
      MatrixXd& prob = bc.probs[h];
      for (Eigen::Index i = 0; i < len; ++i) {
        // Causal: row i attends to positions 0..i.
        VectorXd s = (k.topRows(i + 1) * q.row(i).transpose()) * scale;
        const double mx = s.maxCoeff();
        VectorXd e = (s.array() - mx).exp();
        e /= e.sum();
        prob.row(i).head(i + 1) = e.transpose();
      }
      bc.heads_out.middleCols(h * dh, dh) = prob * v;
    }
    bc.residual = bc.attn_in + linear_forward(bc.heads_out, blk.wo, blk.bo);
    bc.ffn_in = layer_norm_forward(bc.residual, blk.ln2_gain, blk.ln2_bias, &bc.ln2);
    bc.hidden_pre = linear_forward(bc.ffn_in, blk.w1, blk.b1);
    bc.hidden = bc.hidden_pre.cwiseMax(0.0);
    bc.hidden_mask = dropout_mask(len, d, config.dropout, dropout_rng);
    if (bc.hidden_mask.size()) bc.hidden = bc.hidden.cwiseProduct(bc.hidden_mask);
    x = bc.ffn_in + linear_forward(bc.hidden, blk.w2, blk.b2);
  }
  return layer_norm_forward(x, params.final_gain, params.final_bias, &c.final_ln);
}

void cf_backward(const CfParameters& params, const CfConfig& config,
                 const CfForwardCache& cache, const MatrixXd& d_outputs, CfParameters& grads,
                 MatrixXd* d_item_vectors) {
  const Eigen::Index len = d_outputs.rows();
  const int d = config.embed_dim;
  const int heads = config.heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  MatrixXd dx = layer_norm_backward(d_outputs, params.final_gain, cache.final_ln,
                                    grads.final_gain, grads.final_bias);
  for (std::size_t bi = params.blocks.size(); bi-- > 0;) {
    const AttentionBlock& blk = params.blocks[bi];
    AttentionBlock& g = grads.blocks[bi];
    const BlockCache& bc = cache.blocks[bi];

    // x_out = ffn_in + relu(ffn_in W1 + b1) W2 + b2
    MatrixXd d_ffn_in = dx;
    MatrixXd d_hidden = linear_backward(dx, bc.hidden, blk.w2, g.w2, g.b2);
    if (bc.hidden_mask.size()) d_hidden = d_hidden.cwiseProduct(bc.hidden_mask);
    MatrixXd d_pre = (bc.hidden_pre.array() > 0.0).select(d_hidden, 0.0);
    d_ffn_in += linear_backward(d_pre, bc.ffn_in, blk.w1, g.w1, g.b1);
    MatrixXd d_residual =
        layer_norm_backward(d_ffn_in, blk.ln2_gain, bc.ln2, g.ln2_gain, g.ln2_bias);

    // residual = attn_in + heads_out Wo + bo
    MatrixXd d_attn_in = d_residual;
    MatrixXd d_heads = linear_backward(d_residual, bc.heads_out, blk.wo, g.wo, g.bo);
    MatrixXd d_query = MatrixXd::Zero(len, d);
    MatrixXd d_key = MatrixXd::Zero(len, d);
    MatrixXd d_value = MatrixXd::Zero(len, d);
    for (int h = 0; h < heads; ++h) {
      const MatrixXd& prob = bc.probs[h];
      auto q = bc.query.middleCols(h * dh, dh);
      auto k = bc.key.middleCols(h * dh, dh);
      auto v = bc.value.middleCols(h * dh, dh);
      auto dout = d_heads.middleCols(h * dh, dh);
      MatrixXd d_prob = dout * v.transpose();
      d_value.middleCols(h * dh, dh) = prob.transpose() * dout;
      MatrixXd d_score = MatrixXd::Zero(len, len);
      for (Eigen::Index i = 0; i < len; ++i) {
        const double inner = prob.row(i).head(i + 1).dot(d_prob.row(i).head(i + 1));
        d_score.row(i).head(i + 1) =
            (prob.row(i).head(i + 1).array() * (d_prob.row(i).head(i + 1).array() - inner))
                .matrix() *
            scale;
      }
      d_query.middleCols(h * dh, dh) = d_score * k;
      d_key.middleCols(h * dh, dh) = d_score.transpose() * q;
    }
    d_attn_in += linear_backward(d_query, bc.attn_in, blk.wq, g.wq, g.bq);
    MatrixXd d_input = linear_backward(d_key, bc.input, blk.wk, g.wk, g.bk);
    d_input += linear_backward(d_value, bc.input, blk.wv, g.wv, g.bv);
    d_input += layer_norm_backward(d_attn_in, blk.ln1_gain, bc.ln1, g.ln1_gain, g.ln1_bias);
    dx = std::move(d_input);
  }
  if (cache.input_mask.size()) dx = dx.cwiseProduct(cache.input_mask);
  grads.positions.topRows(len) += dx;
  if (d_item_vectors) *d_item_vectors = dx;
}

std::vector<CfTrainingGroup> group_instances(std::span<const TrainingInstance> instances,
                                             int max_history) {
  struct Pending {
    std::vector<int> window;
    int candidate;
    int label;
  };
  std::vector<int> user_order;
  std::map<int, std::vector<Pending>> per_user;
  for (const TrainingInstance& inst : instances) {
    if (inst.history.empty()) throw ContractError("training instance with empty history");
    const std::size_t len = std::min<std::size_t>(inst.history.size(), max_history);
    if (!per_user.count(inst.user)) user_order.push_back(inst.user);
    per_user[inst.user].push_back(
        Pending{std::vector<int>(inst.history.end() - len, inst.history.end()),
                inst.candidate, inst.label});
  }

  std::vector<CfTrainingGroup> groups;
  for (int user : user_order) {
    auto& pending = per_user[user];
    std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
      return a.window.size() > b.window.size();
    });
    const std::size_t first = groups.size();
    for (const Pending& p : pending) {
      CfTrainingGroup* home = nullptr;
      for (std::size_t g = first; g < groups.size(); ++g) {
        const auto& w = groups[g].window;
        if (std::equal(p.window.begin(), p.window.end(), w.begin())) {
          home = &groups[g];
          break;
        }
      }
      if (!home) {
        groups.push_back(CfTrainingGroup{user, p.window, {}});
        home = &groups.back();
      }
      home->targets.push_back(
          CfTarget{static_cast<int>(p.window.size()) - 1, p.candidate, p.label});
    }
  }
  return groups;
}

double cf_loss(const CfParameters& params, const CfConfig& config,
               std::span<const CfTrainingGroup> groups, CfParameters* grads,
               Rng* dropout_rng) {
  std::size_t count = 0;
  for (const auto& g : groups) count += g.targets.size();
  if (count == 0) return 0.0;
  const double inv = 1.0 / static_cast<double>(count);
  double total = 0.0;
  for (const CfTrainingGroup& group : groups) {
    const Eigen::Index len = static_cast<Eigen::Index>(group.window.size());
    MatrixXd inputs(len, config.embed_dim);
    for (Eigen::Index i = 0; i < len; ++i) {
      inputs.row(i) = params.item_embeddings.row(group.window[i]);
    }
    CfForwardCache cache;
    MatrixXd out = cf_forward(params, config, inputs, grads ? &cache : nullptr, dropout_rng);
    MatrixXd d_out = MatrixXd::Zero(len, config.embed_dim);
    for (const CfTarget& t : group.targets) {
      const double s = out.row(t.position).dot(params.item_embeddings.row(t.candidate));
      total += t.label ? softplus(-s) : softplus(s);
      if (grads) {
        const double ds = (sigmoid(s) - t.label) * inv;
        d_out.row(t.position) += ds * params.item_embeddings.row(t.candidate);
        grads->item_embeddings.row(t.candidate) += ds * out.row(t.position);
      }
    }
    if (grads) {
      MatrixXd d_inputs;
      cf_backward(params, config, cache, d_out, *grads, &d_inputs);
      for (Eigen::Index i = 0; i < len; ++i) {
        grads->item_embeddings.row(group.window[i]) += d_inputs.row(i);
      }
    }
  }
  return total * inv;
}

double cf_gradient_check(const CfParameters& params, const CfConfig& config,
                         std::span<const CfTrainingGroup> groups, double step) {
  CfParameters probe = params;
  CfParameters grads = params.zeros_like();
  cf_loss(probe, config, groups, &grads);
  return max_gradient_error(probe.tensors(), grads.tensors(),
                            [&] { return cf_loss(probe, config, groups, nullptr); }, step);
}

CfModel::CfModel(CfConfig config, std::vector<std::string> item_ids, CfParameters params,
                 std::vector<bool> trained_items)
    : config_(config),
      item_ids_(std::move(item_ids)),
      params_(std::move(params)),
      trained_(std::move(trained_items)) {
  config_.validate();
  if (static_cast<Eigen::Index>(item_ids_.size()) != params_.item_embeddings.rows() ||
      trained_.size() != item_ids_.size()) {
    throw ContractError("CfModel: item vocabulary and embedding rows disagree");
  }
}

bool CfModel::knows(int item) const {
  return item >= 0 && item < num_items() && trained_[item];
}

std::optional<int> CfModel::index_of(const std::string& item_id) const {
  auto it = std::find(item_ids_.begin(), item_ids_.end(), item_id);
  if (it == item_ids_.end()) return std::nullopt;
  return static_cast<int>(it - item_ids_.begin());
}

std::optional<VectorXd> CfModel::item_embedding(int item) const {
  if (!knows(item)) return std::nullopt;
  return VectorXd(params_.item_embeddings.row(item).transpose());
}

std::optional<VectorXd> CfModel::item_embedding(const std::string& item_id) const {
  auto idx = index_of(item_id);
  if (!idx) return std::nullopt;
  return item_embedding(*idx);
}

VectorXd CfModel::user_representation(std::span<const int> history) const {
  if (history.empty()) throw ContractError("user_representation: empty history");
  const std::size_t len = std::min<std::size_t>(history.size(), config_.max_history);
  auto window = history.subspan(history.size() - len);
  MatrixXd inputs(len, config_.embed_dim);
  for (std::size_t i = 0; i < len; ++i) {
    if (!knows(window[i])) {
      throw ContractError("user_representation: item " + std::to_string(window[i]) +
                          " has no collaborative embedding");
    }
    inputs.row(i) = params_.item_embeddings.row(window[i]);
  }
  return user_representation_from_vectors(inputs);
}

VectorXd CfModel::user_representation_from_vectors(const MatrixXd& item_vectors) const {
  if (item_vectors.rows() == 0) throw ContractError("user_representation: empty history");
  const Eigen::Index len = std::min<Eigen::Index>(item_vectors.rows(), config_.max_history);
  MatrixXd window = item_vectors.bottomRows(len);
  MatrixXd out = cf_forward(params_, config_, window, nullptr);
  return out.row(len - 1).transpose();
}

VectorXd CfModel::score_items(const VectorXd& user) const {
  return params_.item_embeddings * user;
}

VectorXd CfModel::next_item_scores(std::span<const int> history) const {
  return score_items(user_representation(history));
}

std::string CfModel::digest() const {
  Digest dg;
  CfParameters copy = params_;
  for (const auto& [name, t] : copy.tensors()) dg.update(name).update(*t);
  return dg.hex();
}

Checkpoint CfModel::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "cf_model";
  ckpt.set_meta("embed_dim", std::to_string(config_.embed_dim));
  ckpt.set_meta("max_history", std::to_string(config_.max_history));
  ckpt.set_meta("blocks", std::to_string(config_.blocks));
  ckpt.set_meta("heads", std::to_string(config_.heads));
  ckpt.set_meta("dropout", format_double(config_.dropout));
  ckpt.set_meta("epochs", std::to_string(config_.epochs));
  ckpt.set_meta("batch_size", std::to_string(config_.batch_size));
  ckpt.set_meta("learning_rate", format_double(config_.learning_rate));
  std::string ids;
  std::string trained;
  for (std::size_t i = 0; i < item_ids_.size(); ++i) {
    if (i) ids += '\t';
    ids += item_ids_[i];
    trained += trained_[i] ? '1' : '0';
  }
  ckpt.set_meta("item_ids", ids);
  ckpt.set_meta("trained_items", trained);
  std::string losses;
  for (std::size_t i = 0; i < epoch_losses_.size(); ++i) {
    if (i) losses += ' ';
    losses += format_double(epoch_losses_[i]);
  }
  ckpt.set_meta("epoch_losses", losses);
  CfParameters copy = params_;
  for (const auto& [name, t] : copy.tensors()) ckpt.add_tensor(name, *t);
  return ckpt;
}

CfModel CfModel::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.kind != "cf_model") throw DataError("not a cf_model checkpoint: " + ckpt.kind);
  CfConfig cfg;
  cfg.embed_dim = std::stoi(ckpt.meta_value("embed_dim"));
  cfg.max_history = std::stoi(ckpt.meta_value("max_history"));
  cfg.blocks = std::stoi(ckpt.meta_value("blocks"));
  cfg.heads = std::stoi(ckpt.meta_value("heads"));
  cfg.dropout = parse_double(ckpt.meta_value("dropout"));
  cfg.epochs = std::stoi(ckpt.meta_value("epochs"));
  cfg.batch_size = std::stoi(ckpt.meta_value("batch_size"));
  cfg.learning_rate = parse_double(ckpt.meta_value("learning_rate"));
  std::vector<std::string> ids;
  const std::string& id_text = ckpt.meta_value("item_ids");
  if (!id_text.empty()) {
    for (auto part : split(id_text, '\t')) ids.emplace_back(part);
  }
  std::vector<bool> trained;
  for (char ch : ckpt.meta_value("trained_items")) trained.push_back(ch == '1');
  CfParameters params;
  params.blocks.resize(cfg.blocks);
  for (const auto& [name, t] : params.tensors()) *t = ckpt.tensor(name);
  CfModel model(cfg, std::move(ids), std::move(params), std::move(trained));
  if (ckpt.has_meta("epoch_losses")) {
    const std::string& text = ckpt.meta_value("epoch_losses");
    if (!text.empty()) {
      for (auto part : split(text, ' ')) model.epoch_losses_.push_back(parse_double(part));
    }
  }
  return model;
}

CfModel train_cf(std::span<const TrainingInstance> instances, const CfConfig& config,
                 int num_items, std::vector<std::string> item_ids, Rng& rng) {
  config.validate();
  if (instances.empty()) throw ContractError("train_cf: no training instances");
  std::vector<bool> trained(num_items, false);
  for (const TrainingInstance& inst : instances) {
    if (inst.candidate < 0 || inst.candidate >= num_items) {
      throw ContractError("train_cf: candidate outside the item set");
    }
    trained[inst.candidate] = true;
    for (int q : inst.history) {
      if (q < 0 || q >= num_items) throw ContractError("train_cf: history item outside the item set");
      trained[q] = true;
    }
  }
  if (item_ids.empty()) {
    for (int i = 0; i < num_items; ++i) item_ids.push_back(std::to_string(i));
  }

  Rng init_rng = rng.fork(1);
  Rng order_rng = rng.fork(2);
  Rng dropout_rng = rng.fork(3);
  CfParameters params = init_cf_parameters(config, num_items, init_rng);
  std::vector<CfTrainingGroup> groups = group_instances(instances, config.max_history);

  Optimizer opt(OptimizerConfig{OptimizerKind::kAdam, config.learning_rate});
  std::vector<double> losses;
  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  Rng* drop = config.dropout > 0.0 ? &dropout_rng : nullptr;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    std::size_t epoch_targets = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<CfTrainingGroup> batch;
      std::size_t batch_targets = 0;
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(groups[order[i]]);
        batch_targets += groups[order[i]].targets.size();
      }
      CfParameters grads = params.zeros_like();
      const double loss = cf_loss(params, config, batch, &grads, drop);
      if (!std::isfinite(loss)) {
        throw TrainingError("cf training diverged at epoch " + std::to_string(epoch + 1));
      }
      epoch_loss += loss * static_cast<double>(batch_targets);
      epoch_targets += batch_targets;
      opt.step(params.tensors(), grads.tensors());
    }
    losses.push_back(epoch_loss / static_cast<double>(std::max<std::size_t>(epoch_targets, 1)));
  }

  CfModel model(config, std::move(item_ids), std::move(params), std::move(trained));
  model.epoch_losses_ = std::move(losses);
  return model;
}

VectorXd softmax(const VectorXd& scores) {
  const double mx = scores.maxCoeff();
  VectorXd e = (scores.array() - mx).exp();
  return e / e.sum();
}

double score_percentile(const VectorXd& scores, int candidate) {
  const double s = scores(candidate);
  long lower = 0;
  long equal = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    if (scores(i) < s) ++lower;
    else if (scores(i) == s) ++equal;
  }
  return (static_cast<double>(lower) + 0.5 * static_cast<double>(equal)) /
         static_cast<double>(scores.size());
}

std::string verbalize_prior(double calibrated) {
  const double clamped = std::clamp(calibrated, 0.0, 1.0);
  const long percent = static_cast<long>(std::ceil(clamped * 100.0 - 0.5));
  return "likelihood " + std::to_string(percent) + "%";
}

std::vector<int> rank_by_score(const VectorXd& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores(a) > scores(b); });
  return order;
}

}  // namespace cotrec
