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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cotrec/rng.h"

namespace cotrec {

/// Opaque string ids mapped to dense indices in first-seen order.
class IdMap {
 public:
  int intern(std::string_view id);
  std::optional<int> find(std::string_view id) const;
  int at(std::string_view id) const;
  const std::string& name(int index) const { return names_.at(index); }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
};

struct CatalogEntry {
  std::string title;
  std::string description;
};

using Catalog = std::map<std::string, CatalogEntry>;

struct Event {
  int user = 0;
  int item = 0;
  std::int64_t timestamp = 0;
  double rating = 0.0;
};

struct InteractionLog {
  IdMap users;
  IdMap items;
  std::vector<Event> events;
  Catalog catalog;

  const CatalogEntry& entry(int item) const;
};

/// Catalog lines: `item_id<TAB>title<TAB>description`, fields backslash-escaped.
Catalog parse_catalog(std::string_view text);

/// Interaction lines: `user_id<TAB>item_id<TAB>timestamp<TAB>rating`.
/// Blank lines and lines starting with '#' are skipped; duplicates are kept.
InteractionLog parse_interactions(std::string_view interactions, Catalog catalog);

InteractionLog load_interactions(const std::filesystem::path& interactions,
                                 const std::filesystem::path& catalog);

/// Drops items with fewer than `min_item_popularity` events and users with
/// fewer than `min_user_events` events, repeating until nothing changes.
/// Indices of the result are reassigned in first-seen order.
InteractionLog filter_dataset(const InteractionLog& log, int min_user_events = 5,
                              int min_item_popularity = 5);

struct UserSequence {
  int user = 0;
  std::vector<int> items;  // chronological; position k is items[k - 1]
};

/// One sequence per user, indexed by user.
using SequenceSet = std::vector<UserSequence>;

/// Orders each user's events by (timestamp, item id).
SequenceSet build_sequences(const InteractionLog& log);

struct UserSplit {
  int user = 0;
  std::vector<int> train;
  int validation = -1;
  int test = -1;

  std::vector<int> full() const;
};

struct SplitDataset {
  std::vector<UserSplit> users;
};

/// Last item to test, second-to-last to validation, the rest to train.
SplitDataset leave_one_out_split(const SequenceSet& sequences,
                                 const IdMap* user_names = nullptr);

/// Uniform draw from the items in [0, num_items) that are neither in
/// `sequence` nor in `excluded`.
int sample_negative(std::span<const int> sequence, int num_items, Rng& rng,
                    std::span<const int> excluded = {});

struct TrainingInstance {
  int user = 0;
  std::vector<int> history;
  int candidate = 0;
  int label = 0;
};

/// Per train-prefix position k >= 1: one positive (history = first k items,
/// candidate = item k+1) followed by `negatives_per_positive` negatives.
/// Negatives never come from the user's full sequence or from `excluded`.
std::vector<TrainingInstance> build_training_instances(
    const SplitDataset& split, int num_items, int negatives_per_positive, Rng& rng,
    std::span<const int> excluded = {});

struct ColdWarmPartition {
  std::vector<int> cold;
  std::vector<int> warm;
  std::vector<int> frequency;  // indexed by item

  bool is_cold(int item) const;
  bool is_warm(int item) const;
};

/// Items ranked by (frequency desc, item name asc); the top floor(f * |Q|) are
/// warm and the bottom floor(f * |Q|) cold.
ColdWarmPartition partition_cold_warm(const InteractionLog& log, double fraction = 0.35);

}  // namespace cotrec
