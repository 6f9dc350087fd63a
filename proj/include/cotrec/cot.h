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

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cotrec/data.h"
#include "cotrec/errors.h"
#include "cotrec/semantic.h"

namespace cotrec {

inline constexpr std::size_t kMaxCotTokens = 180;
inline constexpr double kDefaultCotThreshold = 0.6;

inline constexpr std::string_view kTaskInstruction =
    "Given the user's purchase history, the target item and a collaborative prior, "
    "reason step by step about whether the user will interact with the target item.";

inline constexpr std::string_view kPositiveLabelSentence =
    "the user will interact with the target item";
inline constexpr std::string_view kNegativeLabelSentence =
    "the user will not interact with the target item";

struct Candidate {
  std::string item;
  std::string title;
};

/// Prompt x and label y for one (user, target) pair.
struct InstructionInstance {
  std::string user;
  std::string target;
  std::string instruction;
  std::vector<std::string> history;  // rendered lines, oldest first
  std::string target_text;
  std::string prior_text;
  int label = 0;

  // Candidates the CF prior was computed over and the CF top-scored one; used
  // by the rank-agreement half of the consistency score.
  std::vector<Candidate> candidates;
  std::string cf_top;

  std::string profile_text() const;
  /// The four parts in order, one per paragraph.
  std::string render() const;
};

/// Fails with DataError naming the item when the catalog lacks the target or a
/// history item. Keeps the `k_prompt` most recent history items.
InstructionInstance build_instruction_instance(const std::string& user,
                                               std::span<const std::string> history,
                                               const std::string& target,
                                               const std::string& prior_text,
                                               const Catalog& catalog, std::size_t k_prompt,
                                               int label);

class MissingFixtureError : public DataError {
 public:
  MissingFixtureError(const std::string& user, const std::string& item)
      : DataError("no fixture entry for user '" + user + "', item '" + item + "'") {}
};

/// Text keyed by (user_id, item_id).
using FixtureCorpus = std::map<std::pair<std::string, std::string>, std::string>;

/// `user_id<TAB>item_id<TAB>label<TAB>cot_text`, text field escaped.
FixtureCorpus parse_cot_fixtures(std::string_view text);
std::string serialize_cot_fixture_line(const std::string& user, const std::string& item,
                                       int label, const std::string& text);

/// `user_id<TAB>item_id<TAB>text`, text field escaped. Used for explanation
/// fixtures and review-summary references.
FixtureCorpus parse_text_fixtures(std::string_view text);

/// Replaces `{instance}` with the rendered instance and `{label}` with the label
/// sentence.
std::string render_prompt(std::string_view prompt_template, const InstructionInstance& instance);

/// Zero-shot three-step template: user profile, target item, consistency.
extern const std::string kDefaultCotTemplate;

class GenerationAdapter {
 public:
  virtual ~GenerationAdapter() = default;
  /// Raw completion for `prompt`; `user`/`item` key fixture lookups.
  virtual std::string complete(const std::string& user, const std::string& item,
                               const InstructionInstance* instance,
                               const std::string& prompt) = 0;
  int calls() const { return calls_; }
  /// True when replies carry a predicted title and an explanation in one text.
  virtual bool single_pass_replies() const { return false; }

 protected:
  int calls_ = 0;
};

/// Deterministic corpus lookup. With `template_fallback`, misses expand a
/// fixed template from the instance instead of failing.
class FixtureAdapter : public GenerationAdapter {
 public:
  explicit FixtureAdapter(FixtureCorpus corpus, bool template_fallback = false)
      : corpus_(std::move(corpus)), template_fallback_(template_fallback) {}

  std::string complete(const std::string& user, const std::string& item,
                       const InstructionInstance* instance, const std::string& prompt) override;

 private:
  FixtureCorpus corpus_;
  bool template_fallback_;
};

struct RemoteEndpoint {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string path = "/generate";
  int max_attempts = 3;
  int timeout_seconds = 30;
};

/// POSTs {"prompt": ...} as JSON and expects {"text": ...}.
class RemoteAdapter : public GenerationAdapter {
 public:
  explicit RemoteAdapter(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

  std::string complete(const std::string& user, const std::string& item,
                       const InstructionInstance* instance, const std::string& prompt) override;
  bool single_pass_replies() const override { return true; }

 private:
  RemoteEndpoint endpoint_;
};

/// Deterministic stand-in reasoning for an instance, driven by its label.
std::string template_cot(const InstructionInstance& instance);

/// One adapter call; the result is capped at 180 whitespace tokens.
std::string generate_cot(GenerationAdapter& adapter, const InstructionInstance& instance,
                         std::string_view prompt_template = kDefaultCotTemplate);

/// clamp(1 - 0.5 V - 0.5 R, 0, 1): V is the population variance of sentence
/// polarities, R the fraction of duplicate within-sentence 3-grams.
double score_coherence(std::string_view cot);

enum class SemanticDimension { kCompleteness, kRelevance, kConsistency };

/// 1 when the most likely candidate named by the CoT equals the CF top, 0 when
/// it differs or every mention is discounted, 0.5 when none is named.
double rank_agreement(std::string_view cot, const InstructionInstance& instance);

/// The candidate the CoT endorses as most likely, if any.
std::optional<std::string> named_candidate(std::string_view cot,
                                           const InstructionInstance& instance);

double score_semantic_dimension(SemanticDimension dim, std::string_view cot,
                                const InstructionInstance& instance,
                                const TextEmbedder& embedder);

using CotWeights = std::array<double, 4>;
inline constexpr CotWeights kEqualWeights = {0.25, 0.25, 0.25, 0.25};

/// sum_j weights[j] * dims[j].
double composite_score(const std::array<double, 4>& dims, const CotWeights& weights);

struct CotRecord {
  InstructionInstance instance;
  std::string cot;
  std::array<double, 4> dims{};  // coherence, completeness, relevance, consistency
  double score = 0.0;
  bool retained = false;
};

CotRecord score_cot(const InstructionInstance& instance, std::string cot,
                    const TextEmbedder& embedder, const CotWeights& weights = kEqualWeights,
                    double threshold = kDefaultCotThreshold);

struct FilterResult {
  std::vector<CotRecord> retained;
  double coverage = 0.0;
};

FilterResult filter_cots(std::span<const CotRecord> records,
                         double threshold = kDefaultCotThreshold);

struct DownstreamMetrics {
  double hr1 = 0.0;
  double rouge_l = 0.0;
};

using DownstreamEval = std::function<DownstreamMetrics(const std::vector<CotRecord>&)>;

struct SweepRow {
  double threshold = 0.0;
  double coverage = 0.0;
  std::size_t retained = 0;
  std::optional<DownstreamMetrics> downstream;
};

std::vector<SweepRow> threshold_sweep(std::span<const CotRecord> records,
                                      std::span<const double> thresholds,
                                      const DownstreamEval& downstream = {});

/// Header plus one tab-separated row per threshold; downstream columns are
/// "-" when absent.
std::string serialize_sweep(std::span<const SweepRow> rows);

/// Tab-separated persistence of scored records.
std::string serialize_cot_records(std::span<const CotRecord> records);
std::vector<CotRecord> parse_cot_records(std::string_view text);

}  // namespace cotrec
