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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cotrec/align.h"
#include "cotrec/cf_backbone.h"
#include "cotrec/config.h"
#include "cotrec/data.h"
#include "cotrec/eval.h"
#include "cotrec/semantic.h"

namespace cotrec {

enum class Stage { kPrepare, kTrainCf, kTrainAlign, kCot, kTrainProj, kEval, kSweep, kReport };

std::string to_string(Stage stage);
Stage parse_stage(const std::string& name);
/// prepare, train-cf, train-align, cot, train-proj, eval, sweep, report.
const std::vector<Stage>& all_stages();

/// Output file names inside the run directory.
namespace artifact {
inline constexpr const char* kItems = "items.tsv";
inline constexpr const char* kSequences = "sequences.tsv";
inline constexpr const char* kSplit = "split.tsv";
inline constexpr const char* kPrepareReport = "prepare_report.txt";
inline constexpr const char* kCf = "cf.ckpt";
inline constexpr const char* kCfReport = "cf_report.txt";
inline constexpr const char* kAlign = "align.ckpt";
inline constexpr const char* kAlignReport = "align_report.txt";
inline constexpr const char* kCotRecords = "cot_records.tsv";
inline constexpr const char* kCotReport = "cot_report.txt";
inline constexpr const char* kProj = "proj.ckpt";
inline constexpr const char* kProjReport = "proj_report.txt";
inline constexpr const char* kEvalReport = "eval_report.txt";
inline constexpr const char* kZeroShotReport = "zero_shot_report.txt";
inline constexpr const char* kSweep = "sweep.tsv";
inline constexpr const char* kSummary = "summary.txt";
inline constexpr const char* kLock = ".cotrec.lock";
}  // namespace artifact

struct RunOptions {
  bool force = false;          // replace artifacts whose content changed
  std::ostream* log = nullptr;  // progress lines
};

struct StageResult {
  std::vector<std::filesystem::path> written;    // new or replaced
  std::vector<std::filesystem::path> unchanged;  // reproduced byte for byte
  std::string summary;
};

/// Validates the config, takes the output-directory lock and runs one stage.
/// A missing prerequisite artifact raises DependencyError naming the stage to
/// run first. An existing artifact with different content raises ConfigError
/// unless `options.force` is set.
StageResult run_stage(Stage stage, const RunConfig& config, const RunOptions& options = {});

/// Dataset state written by `prepare`, reloaded by later stages.
struct PreparedData {
  std::vector<std::string> item_ids;  // index order
  std::vector<std::string> user_ids;
  ColdWarmPartition partition;
  SplitDataset split;
  Catalog catalog;
  int num_items() const { return static_cast<int>(item_ids.size()); }
};

PreparedData load_prepared(const RunConfig& config);

/// Item scoring with CF user representations and unified item embeddings.
/// Items unknown to the CF model are represented by their semantic stand-ins,
/// both as history entries and as candidates.
class UnifiedScorer {
 public:
  UnifiedScorer(const CfModel& cf, const AlignmentNetwork& net, const SemanticStore& semantics,
                std::vector<std::string> item_ids);
  /// d-dim history vector per item: CF embedding when known, stand-in otherwise.
  const MatrixXd& history_vectors() const { return history_vectors_; }
  /// dec_collab(z) for the unified latent z of every item.
  const MatrixXd& item_vectors() const { return item_vectors_; }
  const MatrixXd& latents() const { return latents_; }
  const std::vector<EmbeddingSource>& sources() const { return sources_; }
  std::size_t semantic_path_count() const;
  VectorXd user_vector(std::span<const int> history) const;
  /// Pool order by descending score, ties by item index.
  std::vector<int> rank(const EvalQuery& query, bool aligned) const;

 private:
  const CfModel& cf_;
  MatrixXd history_vectors_;
  MatrixXd item_vectors_;
  MatrixXd raw_vectors_;  // CF embedding or stand-in, for the plain CF ranker
  MatrixXd latents_;
  std::vector<EmbeddingSource> sources_;
};

struct ZeroShotResult {
  MetricReport report;
  std::size_t target_items = 0;
  std::size_t semantic_path_items = 0;
};

/// Evaluates a frozen source pipeline on a disjoint target domain. Every
/// target item must carry a semantic embedding; items route through the
/// semantic path because the CF vocabulary does not contain them.
ZeroShotResult zero_shot_eval(const CfModel& cf, const AlignmentNetwork& net,
                              const std::filesystem::path& interactions,
                              const std::filesystem::path& catalog,
                              const std::filesystem::path& embeddings, const RunConfig& config);

}  // namespace cotrec
