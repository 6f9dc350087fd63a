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

#include "cotrec/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cotrec/io.h"
#include "cotrec/text.h"

namespace cotrec {

namespace {

void check_rankings(std::span<const std::vector<int>> rankings, std::span<const int> targets,
                    int k) {
  if (k < 1) throw ContractError("k must be positive");
  if (rankings.size() != targets.size()) {
    throw ContractError("one target is required per ranking");
  }
  if (rankings.empty()) throw ContractError("no rankings to evaluate");
  for (const auto& r : rankings) {
    if (static_cast<int>(r.size()) < k) {
      throw ContractError("ranking of length " + std::to_string(r.size()) +
                          " is shorter than k = " + std::to_string(k));
    }
  }
}

// 1-based rank of the first occurrence of target within the top k, 0 if absent.
int rank_within(const std::vector<int>& ranking, int target, int k) {
  for (int j = 0; j < k; ++j) {
    if (ranking[j] == target) return j + 1;
  }
  return 0;
}

}  // namespace

double hit_rate_at_k(std::span<const std::vector<int>> rankings, std::span<const int> targets,
                     int k) {
  check_rankings(rankings, targets, k);
  std::size_t hits = 0;
  for (std::size_t p = 0; p < rankings.size(); ++p) {
    if (rank_within(rankings[p], targets[p], k) > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double ndcg_at_k(std::span<const std::vector<int>> rankings, std::span<const int> targets,
                 int k) {
  check_rankings(rankings, targets, k);
  double total = 0.0;
  for (std::size_t p = 0; p < rankings.size(); ++p) {
    const int r = rank_within(rankings[p], targets[p], k);
    if (r > 0) total += 1.0 / std::log2(r + 1.0);
  }
  return total / static_cast<double>(rankings.size());
}

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, int> ngram_counts(std::span<const std::string> tokens, int n) {
  std::map<Gram, int> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Gram(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

int clipped_overlap(const std::map<Gram, int>& cand, const std::map<Gram, int>& ref) {
  int overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

}  // namespace

double bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
            int max_n) {
  if (reference.empty()) throw ContractError("bleu: empty reference");
  if (max_n < 1) throw ContractError("bleu: max_n must be positive");
  if (candidate.empty()) return 0.0;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto cand = ngram_counts(candidate, n);
    const int total = static_cast<int>(candidate.size()) - n + 1;
    if (total <= 0) return 0.0;
    const int overlap = clipped_overlap(cand, ngram_counts(reference, n));
    if (overlap == 0) return 0.0;
    log_sum += std::log(static_cast<double>(overlap) / total) / max_n;
  }
  const double m = static_cast<double>(candidate.size());
  const double l = static_cast<double>(reference.size());
  const double bp = m > l ? 1.0 : std::exp(1.0 - l / m);
  return bp * std::exp(log_sum);
}

double rouge(std::span<const std::string> candidate, std::span<const std::string> reference,
             RougeVariant variant) {
  if (reference.empty()) throw ContractError("rouge: empty reference");
  if (candidate.empty()) return 0.0;
  if (variant == RougeVariant::kRouge1) {
    const int overlap = clipped_overlap(ngram_counts(candidate, 1), ngram_counts(reference, 1));
    return static_cast<double>(overlap) / static_cast<double>(reference.size());
  }
  const std::size_t m = candidate.size();
  const std::size_t l = reference.size();
  std::vector<int> prev(l + 1, 0), cur(l + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= l; ++j) {
      cur[j] = candidate[i - 1] == reference[j - 1] ? prev[j - 1] + 1
                                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  const double lcs = prev[l];
  return 2.0 * lcs / static_cast<double>(m + l);
}

std::string to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::kStandard:
      return "standard";
    case Protocol::kCold:
      return "cold";
    case Protocol::kWarm:
      return "warm";
    case Protocol::kZeroShot:
      return "zero_shot";
  }
  return "standard";
}

std::string serialize_report(const MetricReport& r) {
  std::string out;
  auto line = [&](const std::string& k, const std::string& v) { out += k + " " + v + "\n"; };
  line("protocol", to_string(r.protocol));
  line("ranker", r.ranker.empty() ? "-" : r.ranker);
  line("seed", std::to_string(r.seed));
  line("config_digest", r.config_digest.empty() ? "-" : r.config_digest);
  line("n_users", std::to_string(r.n_users));
  line("skipped", std::to_string(r.skipped));
  for (const auto& [k, v] : r.hr) line("hr@" + std::to_string(k), format_double(v));
  for (const auto& [k, v] : r.ndcg) line("ndcg@" + std::to_string(k), format_double(v));
  line("explained", std::to_string(r.n_explained));
  if (r.has_explanations) {
    line("bleu4", format_double(r.bleu4));
    line("rouge1", format_double(r.rouge1));
    line("rouge_l", format_double(r.rouge_l));
  }
  return out;
}

std::vector<int> sample_pool(std::span<const int> sequence, int target, int num_items,
                             int pool_size, Rng& rng, std::span<const int> excluded) {
  if (pool_size < 1) throw ConfigError("eval.pool_size must be positive");
  std::vector<int> pool = {target};
  for (int i = 1; i < pool_size; ++i) {
    pool.push_back(sample_negative(sequence, num_items, rng, excluded));
  }
  return pool;
}

MetricReport evaluate_split(const Ranker& ranker, const SplitDataset& split, int num_items,
                            const EvalConfig& config, const ExplanationSource& explanations,
                            const std::function<bool(int item)>& keep, Protocol protocol,
                            std::span<const int> excluded) {
  if (config.ks.empty()) throw ConfigError("eval.ks must not be empty");
  const int max_k = *std::max_element(config.ks.begin(), config.ks.end());
  if (config.pool_size < max_k) {
    throw ConfigError("eval.pool_size must be at least the largest k");
  }
  MetricReport report;
  report.protocol = protocol;
  report.seed = config.seed;
  report.config_digest = config.config_digest;
  std::vector<std::vector<int>> rankings;
  std::vector<int> targets;
  double bleu_sum = 0.0, r1_sum = 0.0, rl_sum = 0.0;
  for (const UserSplit& u : split.users) {
    if (u.test < 0) {
      ++report.skipped;
      continue;
    }
    if (keep && !keep(u.test)) continue;
    const std::vector<int> full = u.full();
    std::vector<int> history = u.train;
    if (u.validation >= 0) history.push_back(u.validation);
    // Pools depend only on (seed, user), so cohort subsets see the same pools.
    Rng rng = Rng(config.seed).fork(static_cast<std::uint64_t>(u.user) + 1);
    EvalQuery q{u.user, history, u.test,
                sample_pool(full, u.test, num_items, config.pool_size, rng, excluded)};
    std::vector<int> ranked = ranker(q);
    std::vector<int> a = ranked, b = q.pool;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw ContractError("ranker output is not a permutation of the pool");
    rankings.push_back(std::move(ranked));
    targets.push_back(u.test);
    if (explanations) {
      if (auto texts = explanations(u.user, u.test)) {
        const auto cand = word_tokens(texts->first);
        const auto ref = word_tokens(texts->second);
        if (!ref.empty()) {
          bleu_sum += bleu(cand, ref, 4);
          r1_sum += rouge(cand, ref, RougeVariant::kRouge1);
          rl_sum += rouge(cand, ref, RougeVariant::kRougeL);
          ++report.n_explained;
        }
      }
    }
  }
  report.n_users = rankings.size();
  if (report.n_users == 0) return report;
  for (int k : config.ks) {
    report.hr[k] = hit_rate_at_k(rankings, targets, k);
    report.ndcg[k] = ndcg_at_k(rankings, targets, k);
  }
  if (report.n_explained > 0) {
    const double n = static_cast<double>(report.n_explained);
    report.has_explanations = true;
    report.bleu4 = bleu_sum / n;
    report.rouge1 = r1_sum / n;
    report.rouge_l = rl_sum / n;
  }
  return report;
}

const MetricReport& ColdWarmReport::cohort(Protocol protocol) const {
  if (protocol == Protocol::kWarm) {
    if (!warm) throw CohortError("warm");
    return *warm;
  }
  if (protocol == Protocol::kCold) {
    if (!cold) throw CohortError("cold");
    return *cold;
  }
  throw ContractError("cohort must be warm or cold");
}

std::optional<double> ColdWarmReport::gap(int k) const {
  if (!warm || !cold) return std::nullopt;
  auto w = warm->hr.find(k);
  auto c = cold->hr.find(k);
  if (w == warm->hr.end() || c == cold->hr.end() || w->second == 0.0) return std::nullopt;
  return (w->second - c->second) / w->second;
}

ColdWarmReport cold_warm_report(const Ranker& ranker, const SplitDataset& split,
                                const ColdWarmPartition& partition, int num_items,
                                const EvalConfig& config, const ExplanationSource& explanations,
                                std::span<const int> excluded) {
  if (static_cast<int>(partition.frequency.size()) != num_items) {
    throw ContractError("partition does not cover the split's item set");
  }
  ColdWarmReport out;
  MetricReport warm = evaluate_split(ranker, split, num_items, config, explanations,
                                     [&](int item) { return partition.is_warm(item); },
                                     Protocol::kWarm, excluded);
  MetricReport cold = evaluate_split(ranker, split, num_items, config, explanations,
                                     [&](int item) { return partition.is_cold(item); },
                                     Protocol::kCold, excluded);
  if (warm.n_users > 0) out.warm = std::move(warm);
  if (cold.n_users > 0) out.cold = std::move(cold);
  return out;
}

std::string format_summary_table(std::span<const MetricReport> reports) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-10s %-10s %7s", "protocol", "ranker", "users");
  out += buf;
  std::vector<int> ks;
  if (!reports.empty()) {
    for (const auto& [k, v] : reports.front().hr) ks.push_back(k);
  }
  for (int k : ks) {
    std::snprintf(buf, sizeof(buf), " %8s %8s", ("HR@" + std::to_string(k)).c_str(),
                  ("NDCG@" + std::to_string(k)).c_str());
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), " %8s %8s %8s\n", "BLEU-4", "ROUGE-1", "ROUGE-L");
  out += buf;
  for (const MetricReport& r : reports) {
    std::snprintf(buf, sizeof(buf), "%-10s %-10s %7zu", to_string(r.protocol).c_str(),
                  r.ranker.c_str(), r.n_users);
    out += buf;
    for (int k : ks) {
      auto h = r.hr.find(k);
      auto n = r.ndcg.find(k);
      std::snprintf(buf, sizeof(buf), " %8.4f %8.4f", h == r.hr.end() ? 0.0 : h->second,
                    n == r.ndcg.end() ? 0.0 : n->second);
      out += buf;
    }
    if (r.has_explanations) {
      std::snprintf(buf, sizeof(buf), " %8.4f %8.4f %8.4f\n", r.bleu4, r.rouge1, r.rouge_l);
    } else {
      std::snprintf(buf, sizeof(buf), " %8s %8s %8s\n", "-", "-", "-");
    }
    out += buf;
  }
  return out;
}

}  // namespace cotrec
