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

// Deliberately naive reference implementations used to cross-check the
// library metrics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace cotrec::oracle {

inline double hit_rate(const std::vector<std::vector<int>>& rankings,
                       const std::vector<int>& targets, int k) {
  double hits = 0;
  for (std::size_t u = 0; u < rankings.size(); ++u) {
    bool found = false;
    for (int j = 0; j < k; ++j) found = found || rankings[u][j] == targets[u];
    hits += found ? 1 : 0;
  }
  return hits / static_cast<double>(rankings.size());
}

inline double ndcg(const std::vector<std::vector<int>>& rankings,
                   const std::vector<int>& targets, int k) {
  double total = 0;
  for (std::size_t u = 0; u < rankings.size(); ++u) {
    double dcg = 0, ideal = 0;
    for (int j = 1; j <= k; ++j) {
      const double rel = rankings[u][j - 1] == targets[u] ? 1.0 : 0.0;
      dcg += (std::pow(2.0, rel) - 1.0) / (std::log(j + 1.0) / std::log(2.0));
    }
    ideal = 1.0;  // one relevant item at rank 1
    total += dcg / ideal;
  }
  return total / static_cast<double>(rankings.size());
}

inline std::string join_gram(const std::vector<std::string>& toks, std::size_t i, int n) {
  std::string g;
  for (int j = 0; j < n; ++j) g += toks[i + j] + '\x1f';
  return g;
}

inline double bleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                   int max_n) {
  if (cand.empty()) return 0.0;
  double log_sum = 0;
  for (int n = 1; n <= max_n; ++n) {
    if (static_cast<int>(cand.size()) < n) return 0.0;
    std::vector<std::string> cg, rg;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) cg.push_back(join_gram(cand, i, n));
    for (std::size_t i = 0; i + n <= ref.size(); ++i) rg.push_back(join_gram(ref, i, n));
    // Clip by matching each candidate gram against an unused reference gram.
    std::vector<bool> used(rg.size(), false);
    int matched = 0;
    for (const auto& g : cg) {
      for (std::size_t r = 0; r < rg.size(); ++r) {
        if (!used[r] && rg[r] == g) {
          used[r] = true;
          ++matched;
          break;
        }
      }
    }
    if (matched == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched) / static_cast<double>(cg.size())) / max_n;
  }
  const double m = static_cast<double>(cand.size());
  const double l = static_cast<double>(ref.size());
  const double bp = m > l ? 1.0 : std::exp(1.0 - l / m);
  return bp * std::exp(log_sum);
}

inline double rouge1(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  if (cand.empty()) return 0.0;
  std::vector<bool> used(cand.size(), false);
  int overlap = 0;
  for (const auto& w : ref) {
    for (std::size_t c = 0; c < cand.size(); ++c) {
      if (!used[c] && cand[c] == w) {
        used[c] = true;
        ++overlap;
        break;
      }
    }
  }
  return static_cast<double>(overlap) / static_cast<double>(ref.size());
}

// LCS by exhaustive recursion with memoization on (i, j).
inline int lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::pair<std::size_t, std::size_t>, int> memo;
  std::function<int(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> int {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int best = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    memo[key] = best;
    return best;
  };
  return go(0, 0);
}

inline double rouge_l(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  if (cand.empty()) return 0.0;
  const double l = lcs(cand, ref);
  if (l == 0) return 0.0;
  const double p = l / static_cast<double>(cand.size());
  const double r = l / static_cast<double>(ref.size());
  return 2 * p * r / (p + r);
}

}  // namespace cotrec::oracle
