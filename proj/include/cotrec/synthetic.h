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
#include <vector>

#include "cotrec/align.h"

namespace cotrec {

struct LinearSuiteConfig {
  int sequences = 100;
  int items_per_sequence = 5;
  int collab_dim = 50;
  int semantic_dim = kSemanticDim;
  double embedding_scale = 2.0;
  int held_out_items = 50;
  bool with_triples = true;
  std::uint64_t seed = 7;
};

/// Paired embeddings with Q = A e exactly, A a fixed random matrix with
/// orthonormal columns.
struct LinearSuite {
  MatrixXd mixing;  // semantic_dim x collab_dim
  std::vector<AlignmentExample> train;
  AlignmentGroup held_out;
};

LinearSuite make_linear_suite(const LinearSuiteConfig& config);

/// Block-structured interaction data. Each block is a ring of items; a user
/// stays in one block and walks forward along its ring, with occasional jumps.
struct PlantedConfig {
  int users = 200;
  int items = 100;
  int blocks = 2;
  int min_length = 10;
  int max_length = 14;
  int max_step = 3;
  double jump_probability = 0.1;
  int harmonics = 8;  // ring-position features in the semantic vectors
  double semantic_noise = 0.02;
  double bad_cot_fraction = 0.25;
  std::string user_prefix = "u";
  std::string item_prefix = "i";
  std::uint64_t seed = 11;
  void validate() const;
};

/// File contents in the formats the loaders accept.
struct PlantedDataset {
  std::string interactions;
  std::string catalog;
  std::string embeddings;
  std::string cot_fixtures;  // one text per (user, sequence item)
  std::string explanations;  // generated explanation per (user, last item)
  std::string references;    // review summary per (user, last item)
  std::vector<int> item_block;  // by generation index
  std::vector<int> user_block;
};

PlantedDataset make_planted_dataset(const PlantedConfig& config);

/// Writes interactions.tsv, catalog.tsv, embeddings.tsv, cot_fixtures.tsv,
/// explanations.tsv and references.tsv under `dir`.
void write_planted_dataset(const std::filesystem::path& dir, const PlantedDataset& data);

}  // namespace cotrec
