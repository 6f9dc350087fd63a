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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cotrec/cf_backbone.h"
#include "cotrec/errors.h"

using namespace cotrec;

namespace {

CfConfig toy_config() {
  CfConfig cfg;
  cfg.embed_dim = 4;
  cfg.max_history = 5;
  cfg.blocks = 2;
  cfg.heads = 2;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.learning_rate = 1e-2;
  return cfg;
}

// 3 users over 5 items.
std::vector<TrainingInstance> toy_instances() {
  SplitDataset split{{UserSplit{0, {0, 1, 2, 0}, 1, 2}, UserSplit{1, {4, 3, 2}, 3, 4},
                      UserSplit{2, {1, 2, 4, 1}, 2, 1}}};
  Rng rng(17);
  return build_training_instances(split, 5, 1, rng);
}

struct Planted {
  std::vector<TrainingInstance> train;
  std::vector<std::pair<std::vector<int>, int>> held_out_pos, held_out_neg;
};

// Users in block A only touch items 0..9, block B only items 10..19.
Planted planted_blocks(int users, int length, std::uint64_t seed) {
  Rng rng(seed);
  SplitDataset split;
  for (int u = 0; u < users; ++u) {
    const int base = (u % 2) * 10;
    UserSplit s;
    s.user = u;
    std::vector<int> seq;
    for (int k = 0; k < length; ++k) seq.push_back(base + static_cast<int>(rng.uniform_index(10)));
    s.train.assign(seq.begin(), seq.end() - 2);
    s.validation = seq[length - 2];
    s.test = seq[length - 1];
    split.users.push_back(s);
  }
  Planted p;
  p.train = build_training_instances(split, 20, 1, rng);
  for (const auto& s : split.users) {
    std::vector<int> history = s.train;
    history.push_back(s.validation);
    p.held_out_pos.emplace_back(history, s.test);
    const int other = ((s.user % 2) == 0 ? 10 : 0) + static_cast<int>(rng.uniform_index(10));
    p.held_out_neg.emplace_back(history, other);
  }
  return p;
}

std::vector<double> row_ln(std::vector<double> x) {
  double mean = 0, var = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  for (double v : x) var += (v - mean) * (v - mean);
  var /= x.size();
  for (double& v : x) v = (v - mean) / std::sqrt(var + kLayerNormEps);
  return x;
}

}  // namespace

TEST_CASE("config validation") {
  CfConfig cfg;
  cfg.heads = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = CfConfig{};
  cfg.max_history = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_NOTHROW(CfConfig{}.validate());
}

TEST_CASE("analytic gradients match central differences on the toy") {
  const CfConfig cfg = toy_config();
  Rng rng(3);
  CfParameters params = init_cf_parameters(cfg, 5, rng);
  const auto inst = toy_instances();
  const auto groups = group_instances(inst, cfg.max_history);
  CHECK(cf_gradient_check(params, cfg, groups) <= 1e-4);

  CfConfig one_head = cfg;
  one_head.heads = 1;
  one_head.blocks = 1;
  Rng rng2(4);
  CfParameters p2 = init_cf_parameters(one_head, 5, rng2);
  CHECK(cf_gradient_check(p2, one_head, groups) <= 1e-4);
}

TEST_CASE("grouping preserves every target") {
  const auto inst = toy_instances();
  const auto groups = group_instances(inst, 5);
  std::size_t targets = 0;
  for (const auto& g : groups) {
    for (const auto& t : g.targets) {
      CHECK(t.position < static_cast<int>(g.window.size()));
      ++targets;
    }
  }
  CHECK(targets == inst.size());
}

TEST_CASE("zero epochs returns the seeded initialization, frozen") {
  CfConfig cfg = toy_config();
  cfg.epochs = 0;
  Rng rng(42);
  CfModel model = train_cf(toy_instances(), cfg, 5, {}, rng);
  CHECK(model.frozen());
  Rng init = Rng(42).fork(1);
  CfModel expected(cfg, model.item_ids(), init_cf_parameters(cfg, 5, init),
                   std::vector<bool>(5, true));
  CHECK(model.digest() == expected.digest());
  CHECK(model.epoch_losses().empty());
}

TEST_CASE("same seed and data give bit-identical models and checkpoints") {
  const CfConfig cfg = toy_config();
  Rng a(9), b(9);
  CfModel m1 = train_cf(toy_instances(), cfg, 5, {}, a);
  CfModel m2 = train_cf(toy_instances(), cfg, 5, {}, b);
  CHECK(m1.digest() == m2.digest());
  const std::string t1 = serialize_checkpoint(m1.to_checkpoint());
  CHECK(t1 == serialize_checkpoint(m2.to_checkpoint()));

  CfModel back = CfModel::from_checkpoint(parse_checkpoint(t1));
  CHECK(back.digest() == m1.digest());
  CHECK(back.epoch_losses() == m1.epoch_losses());
  CHECK(serialize_checkpoint(back.to_checkpoint()) == t1);
}

TEST_CASE("planted blocks: positive scores exceed negatives and loss decreases") {
  Planted p = planted_blocks(60, 10, 123);
  CfConfig cfg;
  cfg.embed_dim = 16;
  cfg.max_history = 10;
  cfg.epochs = 12;
  cfg.batch_size = 16;
  cfg.learning_rate = 5e-3;
  Rng rng(5);
  CfModel model = train_cf(p.train, cfg, 20, {}, rng);

  double pos = 0, neg = 0;
  for (const auto& [h, q] : p.held_out_pos) pos += model.next_item_scores(h)(q);
  for (const auto& [h, q] : p.held_out_neg) neg += model.next_item_scores(h)(q);
  CHECK(pos / p.held_out_pos.size() > neg / p.held_out_neg.size());

  const auto& losses = model.epoch_losses();
  REQUIRE(losses.size() == 12);
  for (std::size_t e = 1; e < losses.size(); ++e) CHECK(losses[e] <= losses[e - 1] * 1.05);
  CHECK(losses.back() < losses.front());
}

TEST_CASE("user representation: truncation, order, brute-force scores") {
  CfConfig cfg = toy_config();
  cfg.max_history = 3;
  Rng rng(12);
  CfModel model(cfg, {"a", "b", "c", "d", "e"}, init_cf_parameters(cfg, 5, rng),
                std::vector<bool>(5, true));
  const std::vector<int> longer{4, 0, 1, 2, 3};
  const std::vector<int> suffix{1, 2, 3};
  CHECK(model.user_representation(longer) == model.user_representation(suffix));
  const std::vector<int> swapped{2, 1, 3};
  CHECK((model.user_representation(suffix) - model.user_representation(swapped)).norm() > 1e-6);

  const VectorXd x = model.user_representation(suffix);
  const VectorXd scores = model.next_item_scores(suffix);
  REQUIRE(scores.size() == 5);
  for (int q = 0; q < 5; ++q) {
    double dot = 0;
    for (int j = 0; j < cfg.embed_dim; ++j) dot += x(j) * model.parameters().item_embeddings(q, j);
    CHECK(scores(q) == doctest::Approx(dot).epsilon(1e-12));
  }
  CHECK_THROWS_AS(model.user_representation(std::vector<int>{}), ContractError);
}

TEST_CASE("single-step forward pass with identity weights") {
  CfConfig cfg;
  cfg.embed_dim = 3;
  cfg.max_history = 2;
  cfg.blocks = 1;
  cfg.heads = 1;
  Rng rng(1);
  CfParameters p = init_cf_parameters(cfg, 2, rng);
  p.item_embeddings << 1.0, 2.0, 4.0, -1.0, 0.5, 0.25;
  p.positions << 0.5, 0.0, -0.5, 0.1, 0.2, 0.3;
  auto& b = p.blocks[0];
  for (MatrixXd* w : {&b.wq, &b.wk, &b.wv, &b.wo, &b.w1, &b.w2}) *w = MatrixXd::Identity(3, 3);
  CfModel model(cfg, {"a", "b"}, p, {true, true});

  // Hand oracle: x = e + pos; a = LN(x); attention over one position returns
  // v = x; r = a + v; f = LN(r); y = f + relu(f); out = LN(y).
  std::vector<double> x{1.5, 2.0, 3.5};
  std::vector<double> a = row_ln(x);
  std::vector<double> r(3);
  for (int i = 0; i < 3; ++i) r[i] = a[i] + x[i];
  std::vector<double> f = row_ln(r);
  std::vector<double> y(3);
  for (int i = 0; i < 3; ++i) y[i] = f[i] + std::max(0.0, f[i]);
  std::vector<double> out = row_ln(y);

  const VectorXd got = model.user_representation(std::vector<int>{0});
  for (int i = 0; i < 3; ++i) CHECK(got(i) == doctest::Approx(out[i]).epsilon(1e-12));
}

TEST_CASE("item embeddings: identical rows tie and rank by index") {
  CfConfig cfg = toy_config();
  Rng rng(2);
  CfParameters p = init_cf_parameters(cfg, 5, rng);
  p.item_embeddings.row(3) = p.item_embeddings.row(1);
  CfModel model(cfg, {"a", "b", "c", "d", "e"}, p, {true, true, true, true, false});
  const VectorXd s = model.next_item_scores(std::vector<int>{0, 2});
  CHECK(s(1) == s(3));
  const auto order = rank_by_score(s);
  const auto pos1 = std::find(order.begin(), order.end(), 1) - order.begin();
  const auto pos3 = std::find(order.begin(), order.end(), 3) - order.begin();
  CHECK(pos1 + 1 == pos3);

  CHECK(model.item_embedding("b").value() == model.item_embedding(1).value());
  CHECK_FALSE(model.item_embedding("zz").has_value());
  CHECK_FALSE(model.item_embedding("e").has_value());
}

TEST_CASE("default embedding width is 50") {
  CfConfig cfg;
  Rng rng(0);
  CfModel model(cfg, {"a", "b"}, init_cf_parameters(cfg, 2, rng), {true, true});
  CHECK(model.item_embedding(0)->size() == 50);
}

TEST_CASE("frozen model digest is stable across queries") {
  CfConfig cfg = toy_config();
  Rng rng(6);
  CfModel model = train_cf(toy_instances(), cfg, 5, {}, rng);
  const std::string before = model.digest();
  for (int i = 0; i < 20; ++i) {
    (void)model.next_item_scores(std::vector<int>{i % 5, (i + 1) % 5});
    (void)model.item_embedding(i % 5);
  }
  CHECK(model.digest() == before);
}

TEST_CASE("verbalized priors") {
  VectorXd scores(100);
  for (int i = 0; i < 100; ++i) scores(i) = i;
  CHECK(verbalize_prior(score_percentile(scores, 99)) == "likelihood 99%");
  CHECK(verbalize_prior(score_percentile(VectorXd::Constant(10, 0.3), 4)) == "likelihood 50%");
  CHECK(verbalize_prior(0.88) == "likelihood 88%");
  CHECK(softmax(scores).sum() == doctest::Approx(1.0));
}
