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
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cotrec/data.h"
#include "cotrec/errors.h"
#include "cotrec/rng.h"

namespace cotrec {

/// Fraction of users whose target is among the first k entries of their ranking.
double hit_rate_at_k(std::span<const std::vector<int>> rankings, std::span<const int> targets,
                     int k);

/// Mean over users of 1/log2(rank + 1) for a target ranked within k, else 0.
double ndcg_at_k(std::span<const std::vector<int>> rankings, std::span<const int> targets,
                 int k);

/// Clipped n-gram precisions for n = 1..max_n with a brevity penalty, uniform
/// weights and no smoothing.
double bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
            int max_n = 4);

enum class RougeVariant { kRouge1, kRougeL };

/// ROUGE-1 recall or ROUGE-L (longest common subsequence) F1.
double rouge(std::span<const std::string> candidate, std::span<const std::string> reference,
             RougeVariant variant);

enum class Protocol { kStandard, kCold, kWarm, kZeroShot };

std::string to_string(Protocol protocol);

struct MetricReport {
  std::map<int, double> hr;
  std::map<int, double> ndcg;
  bool has_explanations = false;
  double bleu4 = 0.0;
  double rouge1 = 0.0;
  double rouge_l = 0.0;
  std::size_t n_users = 0;
  std::size_t n_explained = 0;
  std::size_t skipped = 0;
  Protocol protocol = Protocol::kStandard;
  std::string ranker;
  std::uint64_t seed = 0;
  std::string config_digest;
};

/// Stable `key value` lines.
std::string serialize_report(const MetricReport& report);

/// One ranking query: a user, their observed history and a candidate pool.
struct EvalQuery {
  int user = 0;
  std::span<const int> history;
  int target = 0;
  std::vector<int> pool;  // target first, then sampled negatives
};

/// Ranks a pool; the result must be a permutation of `query.pool`.
using Ranker = std::function<std::vector<int>(const EvalQuery&)>;

/// Generated and reference explanation text for (user, target), if both exist.
using ExplanationSource =
    std::function<std::optional<std::pair<std::string, std::string>>(int user, int target)>;

struct EvalConfig {
  std::vector<int> ks = {1, 5, 10, 20};
  int pool_size = 100;
  std::uint64_t seed = 0;
  std::string config_digest;
};

/// Target plus pool_size - 1 negatives drawn with replacement from items
/// outside the user's sequence and `excluded`.
std::vector<int> sample_pool(std::span<const int> sequence, int target, int num_items,
                             int pool_size, Rng& rng, std::span<const int> excluded = {});

/// Evaluates the test item of every user in `users` (all users when empty).
/// Users whose test target is not accepted by `keep` are skipped.
MetricReport evaluate_split(const Ranker& ranker, const SplitDataset& split, int num_items,
                            const EvalConfig& config, const ExplanationSource& explanations = {},
                            const std::function<bool(int item)>& keep = {},
                            Protocol protocol = Protocol::kStandard,
                            std::span<const int> excluded = {});

class CohortError : public DataError {
 public:
  explicit CohortError(const std::string& cohort)
      : DataError("the " + cohort + " cohort has no test users") {}
};

struct ColdWarmReport {
  std::optional<MetricReport> warm;
  std::optional<MetricReport> cold;

  /// Throws CohortError for an empty cohort.
  const MetricReport& cohort(Protocol protocol) const;
  /// (warm HR@k - cold HR@k) / warm HR@k, signed; nullopt if undefined.
  std::optional<double> gap(int k) const;
};

ColdWarmReport cold_warm_report(const Ranker& ranker, const SplitDataset& split,
                                const ColdWarmPartition& partition, int num_items,
                                const EvalConfig& config,
                                const ExplanationSource& explanations = {},
                                std::span<const int> excluded = {});

/// Fixed-width table of one or more reports.
std::string format_summary_table(std::span<const MetricReport> reports);

}  // namespace cotrec
