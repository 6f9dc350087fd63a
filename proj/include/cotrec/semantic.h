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

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cotrec {

inline constexpr int kSemanticDim = 768;

/// Unit-norm 768-dim text embeddings keyed by item id.
class SemanticStore {
 public:
  SemanticStore() = default;

  void insert(const std::string& item_id, Eigen::VectorXd vector);
  bool contains(const std::string& item_id) const { return vectors_.count(item_id) > 0; }
  const Eigen::VectorXd& at(const std::string& item_id) const;
  std::size_t size() const { return vectors_.size(); }
  const std::map<std::string, Eigen::VectorXd>& vectors() const { return vectors_; }

  /// Ids from `expected` that have no vector, in input order.
  std::vector<std::string> missing(const std::vector<std::string>& expected) const;

 private:
  std::map<std::string, Eigen::VectorXd> vectors_;
};

/// Lines `item_id<TAB>v1 v2 ... v768`; vectors are L2-normalized on load.
SemanticStore parse_embeddings(std::string_view text);
SemanticStore load_embeddings(const std::filesystem::path& path);

/// Deterministic stand-in text encoder: signed-hash bag of lowercased
/// whitespace tokens over 768 buckets, L2-normalized. Text with no tokens (or
/// whose bucket counts cancel exactly) maps to the first basis vector.
Eigen::VectorXd fallback_embed(std::string_view text);

using TextEmbedder = std::function<Eigen::VectorXd(std::string_view)>;

/// Cosine similarity; throws on zero vectors or mismatched dimensions.
double similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// (cosine + 1) / 2, in [0, 1].
double mapped_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

}  // namespace cotrec
