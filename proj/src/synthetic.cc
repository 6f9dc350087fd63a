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

#include "cotrec/synthetic.h"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "cotrec/cot.h"
#include "cotrec/errors.h"
#include "cotrec/io.h"

namespace cotrec {

LinearSuite make_linear_suite(const LinearSuiteConfig& config) {
  if (config.collab_dim > config.semantic_dim) {
    throw ContractError("linear suite needs collab_dim <= semantic_dim");
  }
  Rng rng(config.seed);
  const int d = config.collab_dim;
  LinearSuite suite;
  const MatrixXd g = random_normal(config.semantic_dim, d, 1.0, rng);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  suite.mixing = qr.householderQ() * MatrixXd::Identity(config.semantic_dim, d);
  const MatrixXd at = suite.mixing.transpose();
  for (int s = 0; s < config.sequences; ++s) {
    AlignmentExample ex;
    ex.group.collab = random_normal(config.items_per_sequence, d, config.embedding_scale, rng);
    ex.group.semantic = ex.group.collab * at;
    ex.has_triple = config.with_triples;
    ex.user = random_normal(d, 1, 1.0 / std::sqrt(static_cast<double>(d)), rng);
    ex.positive = random_normal(d, 1, 1.0, rng);
    ex.negative = random_normal(d, 1, 1.0, rng);
    suite.train.push_back(std::move(ex));
  }
  suite.held_out.collab = random_normal(config.held_out_items, d, config.embedding_scale, rng);
  suite.held_out.semantic = suite.held_out.collab * at;
  return suite;
}

namespace {

constexpr const char* kBlockWords[] = {"harbor", "summit", "meadow", "canyon",
                                       "glacier", "delta", "forest", "prairie"};
constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r"};
constexpr const char* kNuclei[] = {"a", "e", "i", "o", "u"};

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  return std::string(s.size() < static_cast<std::size_t>(width) ? width - s.size() : 0, '0') + s;
}

// Two-syllable word unique per ring position (up to 2500 positions).
std::string ring_word(int position) {
  std::string w;
  int p = position;
  for (int i = 0; i < 2; ++i) {
    w += kOnsets[p % 10];
    p /= 10;
    w += kNuclei[p % 5];
    p /= 5;
  }
  return w;
}

}  // namespace

void PlantedConfig::validate() const {
  if (users < 1 || blocks < 1 || blocks > 8) throw ConfigError("planted: users >= 1, blocks in [1, 8]");
  if (items < blocks * 4 || items % blocks != 0) {
    throw ConfigError("planted: items must be a multiple of blocks with at least 4 per block");
  }
  if (items / blocks > 2500) throw ConfigError("planted: at most 2500 items per block");
  if (min_length < 3 || max_length < min_length) throw ConfigError("planted: 3 <= min_length <= max_length");
  if (max_step < 1) throw ConfigError("planted: max_step >= 1");
  if (!(jump_probability >= 0.0 && jump_probability <= 1.0)) throw ConfigError("planted: jump_probability in [0, 1]");
  if (harmonics < 0 || blocks * (1 + 2 * harmonics) > kSemanticDim) {
    throw ConfigError("planted: too many harmonics for the semantic width");
  }
  if (!(semantic_noise >= 0.0)) throw ConfigError("planted: semantic_noise >= 0");
  if (!(bad_cot_fraction >= 0.0 && bad_cot_fraction <= 1.0)) {
    throw ConfigError("planted: bad_cot_fraction in [0, 1]");
  }
}

PlantedDataset make_planted_dataset(const PlantedConfig& config) {
  config.validate();
  Rng rng(config.seed);
  Rng walk_rng = rng.fork(1);
  Rng sem_rng = rng.fork(2);
  Rng cot_rng = rng.fork(3);
  const int per_block = config.items / config.blocks;
  const int width = static_cast<int>(std::to_string(std::max(config.items, config.users)).size());

  PlantedDataset out;
  std::vector<std::string> item_ids(config.items), titles(config.items);
  std::vector<std::string> block_word(config.items);
  for (int q = 0; q < config.items; ++q) {
    const int b = q / per_block;
    out.item_block.push_back(b);
    item_ids[q] = config.item_prefix + padded(q, width);
    block_word[q] = kBlockWords[b];
    titles[q] = block_word[q] + " " + ring_word(q % per_block);
    out.catalog += escape_field(item_ids[q]) + "\t" + escape_field(titles[q]) + "\t" +
                   escape_field("stop " + std::to_string(q % per_block) + " on the " +
                                block_word[q] + " trail") +
                   "\n";
  }

  // Semantic vectors: per-block indicator and ring harmonics, mixed into the
  // embedding width by a random orthonormal map, plus isotropic noise.
  const int feat_per_block = 1 + 2 * config.harmonics;
  const int features = config.blocks * feat_per_block;
  Eigen::HouseholderQR<MatrixXd> qr(random_normal(kSemanticDim, features, 1.0, sem_rng));
  const MatrixXd mixing = qr.householderQ() * MatrixXd::Identity(kSemanticDim, features);
  for (int q = 0; q < config.items; ++q) {
    VectorXd f = VectorXd::Zero(features);
    const int b = q / per_block;
    const double angle = 2.0 * std::numbers::pi * (q % per_block) / per_block;
    f(b * feat_per_block) = 1.0;
    for (int h = 1; h <= config.harmonics; ++h) {
      f(b * feat_per_block + 2 * h - 1) = std::cos(h * angle);
      f(b * feat_per_block + 2 * h) = std::sin(h * angle);
    }
    VectorXd v = mixing * f;
    for (int i = 0; i < kSemanticDim; ++i) v(i) += config.semantic_noise * sem_rng.normal();
    out.embeddings += item_ids[q] + "\t";
    char buf[32];
    for (int i = 0; i < kSemanticDim; ++i) {
      std::snprintf(buf, sizeof(buf), i == 0 ? "%.7g" : " %.7g", v(i));
      out.embeddings += buf;
    }
    out.embeddings += "\n";
  }

  for (int u = 0; u < config.users; ++u) {
    const int b = u % config.blocks;
    out.user_block.push_back(b);
    const std::string user = config.user_prefix + padded(u, width);
    const int length = config.min_length +
                       static_cast<int>(walk_rng.uniform_index(config.max_length - config.min_length + 1));
    int pos = static_cast<int>(walk_rng.uniform_index(per_block));
    std::vector<int> seq;
    for (int j = 0; j < length; ++j) {
      if (j > 0) {
        if (walk_rng.uniform01() < config.jump_probability) {
          pos = static_cast<int>(walk_rng.uniform_index(per_block));
        } else {
          pos = (pos + 1 + static_cast<int>(walk_rng.uniform_index(config.max_step))) % per_block;
        }
      }
      seq.push_back(b * per_block + pos);
    }
    for (int j = 0; j < length; ++j) {
      const long ts = 1'600'000'000L + 86'400L * (u * 64 + j);
      out.interactions += user + "\t" + item_ids[seq[j]] + "\t" + std::to_string(ts) + "\t5\n";
    }
    for (int j = 1; j < length; ++j) {
      const int q = seq[j];
      const std::string& prev = titles[seq[j - 1]];
      std::string text;
      if (cot_rng.uniform01() < config.bad_cot_fraction) {
        // Off-topic and self-contradicting: low coherence and weak overlap
        // with the profile and the target.
        const int other = ((q / per_block + 1) % config.blocks) * per_block +
                          static_cast<int>(cot_rng.uniform_index(per_block));
        text = "Great great great, wonderful and excellent. Terrible terrible terrible, awful and "
               "horrible. Honestly " + titles[other] + " " + titles[other] + " " + titles[other] +
               " " + titles[other] + " fits better.";
      } else {
        text = "The user has been following the " + block_word[q] + " collection, most recently " +
               prev + ". " + titles[q] + " is the next stop along the same " + block_word[q] +
               " trail, so the profile and the target agree. The user will likely interact with " +
               titles[q] + ".";
      }
      out.cot_fixtures += serialize_cot_fixture_line(user, item_ids[q], 1, text);
    }
    const int last = seq.back();
    const std::string& prev = titles[seq[seq.size() - 2]];
    out.explanations += user + "\t" + item_ids[last] + "\t" +
                        escape_field("the " + titles[last] + " is the natural next stop after " +
                                     prev + " on the " + block_word[last] + " trail") +
                        "\n";
    out.references += user + "\t" + item_ids[last] + "\t" +
                      escape_field("the " + titles[last] + " was a natural next stop after " + prev +
                                   " on the " + block_word[last] + " trail") +
                      "\n";
  }
  return out;
}

void write_planted_dataset(const std::filesystem::path& dir, const PlantedDataset& data) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "interactions.tsv", data.interactions);
  write_file_atomic(dir / "catalog.tsv", data.catalog);
  write_file_atomic(dir / "embeddings.tsv", data.embeddings);
  write_file_atomic(dir / "cot_fixtures.tsv", data.cot_fixtures);
  write_file_atomic(dir / "explanations.tsv", data.explanations);
  write_file_atomic(dir / "references.tsv", data.references);
}

}  // namespace cotrec
