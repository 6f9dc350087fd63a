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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cotrec/align.h"
#include "cotrec/cf_backbone.h"
#include "cotrec/cot.h"
#include "cotrec/projection.h"

namespace cotrec {

/// Every knob of a pipeline run. Files use one `dotted.key = value` per line.
struct RunConfig {
  struct Paths {
    std::filesystem::path interactions;
    std::filesystem::path catalog;
    std::filesystem::path embeddings;
    std::filesystem::path cot_fixtures;
    std::filesystem::path explanations;
    std::filesystem::path references;
    std::filesystem::path out;
    std::filesystem::path zero_shot_interactions;
    std::filesystem::path zero_shot_catalog;
    std::filesystem::path zero_shot_embeddings;
  } paths;

  std::uint64_t seed = 42;

  int min_user_events = 5;
  int min_item_popularity = 5;
  int negatives = 1;
  double cold_fraction = 0.35;
  bool hold_out_cold = false;  // cold items take no part in CF training

  CfConfig cf{.epochs = 10, .batch_size = 16, .learning_rate = 1e-3};

  double alpha = 0.5;
  double beta = 0.2;
  int latent_dim = kLatentDim;
  AlignmentTrainConfig align;

  double cot_threshold = kDefaultCotThreshold;
  CotWeights cot_weights = kEqualWeights;
  int k_prompt = 10;
  int cot_samples = 100;
  int cot_candidates = 5;
  std::string cot_adapter = "fixture";
  bool cot_template_fallback = true;
  RemoteEndpoint remote;

  int token_dim = kTokenDim;
  int proj_hidden = kProjectionHidden;
  ProjectionTrainConfig proj{.epochs = 5, .batch_size = 4, .learning_rate = 1e-4};
  int proj_candidates = 10;

  std::vector<int> ks{1, 5, 10, 20};
  int pool_size = 100;
  std::string ranker = "aligned";

  std::vector<double> sweep_thresholds{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  bool sweep_downstream = false;

  /// Applies one `key = value` assignment; throws ConfigError naming the key.
  void set(std::string_view key, std::string_view value);
  /// Range checks on every field and existence checks on every set path.
  void validate() const;
  /// All keys in a fixed order, one `key = value` line each.
  std::string serialize() const;
  /// Digest of every non-path field plus the contents of every input file.
  /// The output directory does not enter.
  std::string digest() const;
};

/// Parses a config file. Relative paths resolve against `base_dir`.
RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace cotrec
