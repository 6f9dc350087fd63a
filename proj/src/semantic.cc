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

#include "cotrec/semantic.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>

#include "cotrec/errors.h"
#include "cotrec/io.h"

namespace cotrec {

void SemanticStore::insert(const std::string& item_id, Eigen::VectorXd vector) {
  if (vector.size() != kSemanticDim) {
    throw DataError("semantic vector for '" + item_id + "' has dimension " +
                    std::to_string(vector.size()));
  }
  const double norm = vector.norm();
  if (!std::isfinite(norm)) throw DataError("non-finite semantic vector for '" + item_id + "'");
  if (norm == 0.0) throw DataError("zero semantic vector for '" + item_id + "'");
  vectors_[item_id] = vector / norm;
}

const Eigen::VectorXd& SemanticStore::at(const std::string& item_id) const {
  auto it = vectors_.find(item_id);
  if (it == vectors_.end()) throw DataError("no semantic embedding for item '" + item_id + "'");
  return it->second;
}

std::vector<std::string> SemanticStore::missing(const std::vector<std::string>& expected) const {
  std::vector<std::string> out;
  for (const auto& id : expected) {
    if (!contains(id)) out.push_back(id);
  }
  return out;
}

SemanticStore parse_embeddings(std::string_view text) {
  SemanticStore store;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string_view::npos) throw ParseError(line_no, "expected item_id<TAB>vector");
    const std::string id(trim(line.substr(0, tab)));
    Eigen::VectorXd v(kSemanticDim);
    int n = 0;
    for (std::string_view tok : split(trim(line.substr(tab + 1)), ' ')) {
      if (tok.empty()) continue;
      if (n >= kSemanticDim) {
        throw ParseError(line_no, "embedding has more than " + std::to_string(kSemanticDim) +
                                      " values");
      }
      double value;
      try {
        value = parse_double(tok);
      } catch (const DataError&) {
        throw ParseError(line_no, "bad embedding value '" + std::string(tok) + "'");
      }
      if (!std::isfinite(value)) throw ParseError(line_no, "non-finite embedding value");
      v(n++) = value;
    }
    if (n != kSemanticDim) {
      throw ParseError(line_no, "embedding has " + std::to_string(n) + " values, expected " +
                                    std::to_string(kSemanticDim));
    }
    if (v.norm() == 0.0) throw ParseError(line_no, "zero embedding vector");
    store.insert(id, v);
  }
  return store;
}

SemanticStore load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_file(path));
}

namespace {

constexpr std::uint64_t kHashSeed = 0x5eed5eedcafef00dULL;

std::uint64_t hash_token(std::string_view token) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ kHashSeed;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  // Final avalanche so low bits are usable as a bucket index.
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  return h;
}

}  // namespace

Eigen::VectorXd fallback_embed(std::string_view text) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(kSemanticDim);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = hash_token(token);
    const int bucket = static_cast<int>(h % kSemanticDim);
    v(bucket) += (h >> 63) ? -1.0 : 1.0;
    token.clear();
  };
  for (char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  flush();
  const double norm = v.norm();
  if (norm == 0.0) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(kSemanticDim);
    e1(0) = 1.0;
    return e1;
  }
  return v / norm;
}

double similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw ContractError("similarity: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw ContractError("similarity: zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

double mapped_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return 0.5 * (similarity(u, v) + 1.0);
}

}  // namespace cotrec
