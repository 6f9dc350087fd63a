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

#include "cotrec/data.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "cotrec/errors.h"
#include "cotrec/io.h"

namespace cotrec {

int IdMap::intern(std::string_view id) {
  auto it = index_.find(std::string(id));
  if (it != index_.end()) return it->second;
  const int idx = static_cast<int>(names_.size());
  names_.emplace_back(id);
  index_.emplace(names_.back(), idx);
  return idx;
}

std::optional<int> IdMap::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int IdMap::at(std::string_view id) const {
  auto idx = find(id);
  if (!idx) throw DataError("unknown id '" + std::string(id) + "'");
  return *idx;
}

const CatalogEntry& InteractionLog::entry(int item) const {
  const std::string& id = items.name(item);
  auto it = catalog.find(id);
  if (it == catalog.end()) throw DataError("no catalog entry for item '" + id + "'");
  return it->second;
}

Catalog parse_catalog(std::string_view text) {
  Catalog catalog;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) {
      throw ParseError(line_no, "catalog record needs 3 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    std::string id(trim(fields[0]));
    if (id.empty()) throw ParseError(line_no, "empty item id");
    catalog[id] = CatalogEntry{unescape_field(trim(fields[1])),
                               unescape_field(trim(fields[2]))};
  }
  return catalog;
}

InteractionLog parse_interactions(std::string_view interactions, Catalog catalog) {
  InteractionLog log;
  log.catalog = std::move(catalog);
  std::size_t line_no = 0;
  for (std::string_view line : split(interactions, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() != 4) {
      throw ParseError(line_no, "interaction record needs 4 tab-separated fields, got " +
                                    std::to_string(fields.size()));
    }
    const std::string_view user = trim(fields[0]);
    const std::string_view item = trim(fields[1]);
    if (user.empty() || item.empty()) throw ParseError(line_no, "empty id");
    const std::string_view ts_text = trim(fields[2]);
    std::int64_t ts = 0;
    auto [end, ec] = std::from_chars(ts_text.data(), ts_text.data() + ts_text.size(), ts);
    if (ec != std::errc() || end != ts_text.data() + ts_text.size()) {
      throw ParseError(line_no, "bad timestamp '" + std::string(ts_text) + "'");
    }
    double rating = 0.0;
    try {
      rating = parse_double(fields[3]);
    } catch (const DataError&) {
      throw ParseError(line_no, "bad rating '" + std::string(trim(fields[3])) + "'");
    }
    if (!log.catalog.count(std::string(item))) {
      throw DataError("line " + std::to_string(line_no) + ": item '" + std::string(item) +
                      "' has no catalog entry");
    }
    log.events.push_back(Event{log.users.intern(user), log.items.intern(item), ts, rating});
  }
  return log;
}

InteractionLog load_interactions(const std::filesystem::path& interactions,
                                 const std::filesystem::path& catalog) {
  return parse_interactions(read_file(interactions), parse_catalog(read_file(catalog)));
}

InteractionLog filter_dataset(const InteractionLog& log, int min_user_events,
                              int min_item_popularity) {
  if (min_user_events < 1 || min_item_popularity < 1) {
    throw ContractError("filter thresholds must be >= 1");
  }
  std::vector<bool> keep(log.events.size(), true);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> item_count(log.items.size(), 0);
    for (std::size_t i = 0; i < log.events.size(); ++i) {
      if (keep[i]) ++item_count[log.events[i].item];
    }
    for (std::size_t i = 0; i < log.events.size(); ++i) {
      if (keep[i] && item_count[log.events[i].item] < min_item_popularity) {
        keep[i] = false;
        changed = true;
      }
    }
    std::vector<int> user_count(log.users.size(), 0);
    for (std::size_t i = 0; i < log.events.size(); ++i) {
      if (keep[i]) ++user_count[log.events[i].user];
    }
    for (std::size_t i = 0; i < log.events.size(); ++i) {
      if (keep[i] && user_count[log.events[i].user] < min_user_events) {
        keep[i] = false;
        changed = true;
      }
    }
  }

  InteractionLog out;
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    if (!keep[i]) continue;
    const Event& e = log.events[i];
    const std::string& item_id = log.items.name(e.item);
    out.events.push_back(Event{out.users.intern(log.users.name(e.user)),
                               out.items.intern(item_id), e.timestamp, e.rating});
    out.catalog.emplace(item_id, log.catalog.at(item_id));
  }
  if (out.events.empty()) throw DataError("filtering removed every interaction");
  return out;
}

SequenceSet build_sequences(const InteractionLog& log) {
  std::vector<std::vector<const Event*>> per_user(log.users.size());
  for (const Event& e : log.events) per_user[e.user].push_back(&e);
  SequenceSet sequences(log.users.size());
  for (int u = 0; u < log.users.size(); ++u) {
    auto& events = per_user[u];
    std::stable_sort(events.begin(), events.end(), [&](const Event* a, const Event* b) {
      if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
      return log.items.name(a->item) < log.items.name(b->item);
    });
    sequences[u].user = u;
    for (const Event* e : events) sequences[u].items.push_back(e->item);
  }
  return sequences;
}

std::vector<int> UserSplit::full() const {
  std::vector<int> items = train;
  items.push_back(validation);
  items.push_back(test);
  return items;
}

SplitDataset leave_one_out_split(const SequenceSet& sequences, const IdMap* user_names) {
  SplitDataset split;
  split.users.reserve(sequences.size());
  for (const UserSequence& seq : sequences) {
    const std::size_t n = seq.items.size();
    if (n < 3) {
      std::string who = user_names ? user_names->name(seq.user) : std::to_string(seq.user);
      throw DataError("cannot split user '" + who + "': sequence has " +
                      std::to_string(n) + " items, need at least 3");
    }
    UserSplit us;
    us.user = seq.user;
    us.train.assign(seq.items.begin(), seq.items.end() - 2);
    us.validation = seq.items[n - 2];
    us.test = seq.items[n - 1];
    split.users.push_back(std::move(us));
  }
  return split;
}

int sample_negative(std::span<const int> sequence, int num_items, Rng& rng,
                    std::span<const int> excluded) {
  std::vector<int> blocked(sequence.begin(), sequence.end());
  blocked.insert(blocked.end(), excluded.begin(), excluded.end());
  std::sort(blocked.begin(), blocked.end());
  blocked.erase(std::unique(blocked.begin(), blocked.end()), blocked.end());
  blocked.erase(std::remove_if(blocked.begin(), blocked.end(),
                               [&](int q) { return q < 0 || q >= num_items; }),
                blocked.end());
  const int eligible = num_items - static_cast<int>(blocked.size());
  if (eligible <= 0) throw DataError("no negative item available: user has seen every item");
  // The r-th eligible item: skip over blocked items at or below the cursor.
  int item = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(eligible)));
  for (int b : blocked) {
    if (b <= item) ++item;
    else break;
  }
  return item;
}

std::vector<TrainingInstance> build_training_instances(const SplitDataset& split,
                                                       int num_items,
                                                       int negatives_per_positive, Rng& rng,
                                                       std::span<const int> excluded) {
  if (negatives_per_positive < 1) throw ContractError("negatives_per_positive must be >= 1");
  std::vector<TrainingInstance> instances;
  for (const UserSplit& us : split.users) {
    const std::vector<int> full = us.full();
    for (std::size_t k = 1; k < us.train.size(); ++k) {
      std::vector<int> history(us.train.begin(), us.train.begin() + k);
      instances.push_back(TrainingInstance{us.user, history, us.train[k], 1});
      for (int n = 0; n < negatives_per_positive; ++n) {
        instances.push_back(TrainingInstance{
            us.user, history, sample_negative(full, num_items, rng, excluded), 0});
      }
    }
  }
  return instances;
}

bool ColdWarmPartition::is_cold(int item) const {
  return std::binary_search(cold.begin(), cold.end(), item);
}

bool ColdWarmPartition::is_warm(int item) const {
  return std::binary_search(warm.begin(), warm.end(), item);
}

ColdWarmPartition partition_cold_warm(const InteractionLog& log, double fraction) {
  if (!(fraction > 0.0 && fraction <= 0.5)) {
    throw ContractError("cold/warm fraction must be in (0, 0.5]");
  }
  const int n = log.items.size();
  if (n < 2) throw DataError("cold/warm partition needs at least 2 distinct items");
  ColdWarmPartition part;
  part.frequency.assign(n, 0);
  for (const Event& e : log.events) ++part.frequency[e.item];
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (part.frequency[a] != part.frequency[b]) return part.frequency[a] > part.frequency[b];
    return log.items.name(a) < log.items.name(b);
  });
  const int m = static_cast<int>(std::floor(fraction * n + 1e-9));
  part.warm.assign(order.begin(), order.begin() + m);
  part.cold.assign(order.end() - m, order.end());
  std::sort(part.warm.begin(), part.warm.end());
  std::sort(part.cold.begin(), part.cold.end());
  return part;
}

}  // namespace cotrec
