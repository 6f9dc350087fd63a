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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "cotrec/errors.h"
#include "test_support.h"

using namespace cotrec;
using cotrec::testing::make_log;
using cotrec::testing::RawEvent;

namespace {

std::vector<std::string> names(const InteractionLog& log, const std::vector<int>& items) {
  std::vector<std::string> out;
  for (int i : items) out.push_back(log.items.name(i));
  return out;
}

std::multiset<RawEvent> event_set(const InteractionLog& log) {
  std::multiset<RawEvent> out;
  for (const Event& e : log.events) {
    out.insert({log.users.name(e.user), log.items.name(e.item), e.timestamp});
  }
  return out;
}

// Independent oracle: alternately drop rare items and short users on the raw
// triples until nothing changes.
std::multiset<RawEvent> brute_force_filter(std::vector<RawEvent> events, int min_user,
                                           int min_item) {
  for (;;) {
    const std::size_t before = events.size();
    std::map<std::string, int> item_count, user_count;
    for (const auto& [u, i, t] : events) ++item_count[i];
    std::erase_if(events, [&](const RawEvent& e) { return item_count[std::get<1>(e)] < min_item; });
    for (const auto& [u, i, t] : events) ++user_count[u];
    std::erase_if(events, [&](const RawEvent& e) { return user_count[std::get<0>(e)] < min_user; });
    if (events.size() == before) break;
  }
  return {events.begin(), events.end()};
}

std::vector<RawEvent> dense_block(const std::vector<std::string>& users,
                                  const std::vector<std::string>& items) {
  std::vector<RawEvent> out;
  long t = 0;
  for (const auto& u : users) {
    for (const auto& i : items) out.emplace_back(u, i, ++t);
  }
  return out;
}

}  // namespace

TEST_CASE("load: empty input gives an empty log") {
  InteractionLog log = parse_interactions("", {});
  CHECK(log.users.size() == 0);
  CHECK(log.items.size() == 0);
  CHECK(log.events.empty());
}

TEST_CASE("load: single record") {
  InteractionLog log = parse_interactions("u1\ti1\t100\t5.0\n", parse_catalog("i1\tA\tB\n"));
  CHECK(log.users.size() == 1);
  CHECK(log.items.size() == 1);
  REQUIRE(log.events.size() == 1);
  CHECK(log.events[0].timestamp == 100);
  CHECK(log.events[0].rating == 5.0);
  CHECK(log.entry(0).title == "A");
}

TEST_CASE("load: duplicate events are retained") {
  const std::string text = "u1\ti1\t100\t5\nu1\ti2\t101\t4\nu1\ti1\t100\t5\nu2\ti2\t50\t3\n";
  InteractionLog log = parse_interactions(text, parse_catalog("i1\ta\tb\ni2\tc\td\n"));
  CHECK(log.events.size() == 4);
  CHECK(log.users.size() == 2);
}

TEST_CASE("load: errors carry line numbers and referential failures") {
  const Catalog cat = parse_catalog("i1\ta\tb\n");
  try {
    parse_interactions("u1\ti1\t1\t1\n# comment\nu2\ti1\tnot-a-time\t1\n", cat);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse_interactions("u1\ti1\t1\n", cat), ParseError);
  CHECK_THROWS_AS(parse_interactions("u1\tmissing\t1\t1\n", cat), DataError);
  CHECK_THROWS_AS(parse_catalog("i1\tonly title\n"), ParseError);
}

TEST_CASE("filter: fixed point input is unchanged") {
  auto events = dense_block({"a", "b", "c", "d", "e"}, {"p", "q", "r", "s", "t"});
  InteractionLog log = make_log(events);
  InteractionLog out = filter_dataset(log);
  CHECK(event_set(out) == event_set(log));
}

TEST_CASE("filter: a user with four events is removed") {
  auto events = dense_block({"a", "b", "c", "d", "e"}, {"p", "q", "r", "s", "t"});
  events.emplace_back("short", "p", 1);
  events.emplace_back("short", "q", 2);
  events.emplace_back("short", "r", 3);
  events.emplace_back("short", "s", 4);
  InteractionLog out = filter_dataset(make_log(events));
  CHECK_FALSE(out.users.find("short").has_value());
  CHECK(out.events.size() == 25);
}

TEST_CASE("filter: cascading removals reach the brute-force fixed point") {
  // u6 has 4 events and goes. Item x then has 4 events and goes, which leaves
  // u5 with 4 events, so u5 goes too.
  auto events = dense_block({"u1", "u2", "u3", "u4", "u7"}, {"p", "q", "r", "s", "t"});
  for (auto i : {"p", "q", "r", "s", "x"}) events.emplace_back("u5", i, 50);
  for (auto i : {"x", "p", "q", "r"}) events.emplace_back("u6", i, 60);
  for (auto u : {"u1", "u2", "u3"}) events.emplace_back(u, "x", 70);

  InteractionLog out = filter_dataset(make_log(events));
  CHECK(event_set(out) == brute_force_filter(events, 5, 5));
  CHECK_FALSE(out.users.find("u6").has_value());
  CHECK_FALSE(out.users.find("u5").has_value());
  CHECK_FALSE(out.items.find("x").has_value());
  CHECK(out.users.size() == 5);
  CHECK(out.items.size() == 5);
}

TEST_CASE("filter: randomized cases match the oracle and are idempotent") {
  Rng rng(7);
  for (int round = 0; round < 30; ++round) {
    std::vector<RawEvent> events;
    const int n = 40 + static_cast<int>(rng.uniform_index(200));
    for (int e = 0; e < n; ++e) {
      events.emplace_back("u" + std::to_string(rng.uniform_index(15)),
                          "i" + std::to_string(rng.uniform_index(20)), e);
    }
    const auto expected = brute_force_filter(events, 3, 3);
    InteractionLog log = make_log(events);
    if (expected.empty()) {
      CHECK_THROWS_AS(filter_dataset(log, 3, 3), DataError);
      continue;
    }
    InteractionLog once = filter_dataset(log, 3, 3);
    CHECK(event_set(once) == expected);
    CHECK(event_set(filter_dataset(once, 3, 3)) == expected);
    for (const Event& e : once.events) CHECK(once.catalog.count(once.items.name(e.item)) == 1);
  }
}

TEST_CASE("filter: everything removed is an error") {
  CHECK_THROWS_AS(filter_dataset(make_log({{"a", "p", 1}})), DataError);
  CHECK_THROWS_AS(filter_dataset(make_log({{"a", "p", 1}}), 0, 1), ContractError);
}

TEST_CASE("sequences: sort by timestamp then item id") {
  {
    InteractionLog log = make_log({{"u", "c", 3}, {"u", "a", 1}, {"u", "b", 2}});
    SequenceSet seq = build_sequences(log);
    REQUIRE(seq.size() == 1);
    CHECK(names(log, seq[0].items) == std::vector<std::string>{"a", "b", "c"});
  }
  {
    InteractionLog log = make_log({{"u", "z", 1}, {"u", "a", 1}});
    CHECK(names(log, build_sequences(log)[0].items) == std::vector<std::string>{"a", "z"});
  }
}

TEST_CASE("sequences: a re-watch keeps both occurrences") {
  InteractionLog log = make_log({{"peter", "q5", 40}, {"peter", "q10", 30},
                                 {"peter", "q8", 20}, {"peter", "q5", 10}});
  CHECK(names(log, build_sequences(log)[0].items) ==
        std::vector<std::string>{"q5", "q8", "q10", "q5"});
}

TEST_CASE("split: leave-one-out examples") {
  SequenceSet seqs{{0, {0, 1, 2}}, {1, {0, 1, 2, 3, 4}}};
  SplitDataset s = leave_one_out_split(seqs);
  CHECK(s.users[0].train == std::vector<int>{0});
  CHECK(s.users[0].validation == 1);
  CHECK(s.users[0].test == 2);
  CHECK(s.users[1].train == std::vector<int>{0, 1, 2});
  CHECK(s.users[1].validation == 3);
  CHECK(s.users[1].test == 4);
}

TEST_CASE("split: short sequences name the user") {
  IdMap users;
  users.intern("alice");
  try {
    leave_one_out_split({{0, {0, 1}}}, &users);
    FAIL("expected a split error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("alice") != std::string::npos);
  }
}

TEST_CASE("split: concatenation reconstructs 100 random sequences") {
  Rng rng(11);
  SequenceSet seqs;
  for (int u = 0; u < 100; ++u) {
    UserSequence s{u, {}};
    const int len = 3 + static_cast<int>(rng.uniform_index(20));
    for (int k = 0; k < len; ++k) s.items.push_back(static_cast<int>(rng.uniform_index(50)));
    seqs.push_back(s);
  }
  SplitDataset split = leave_one_out_split(seqs);
  for (int u = 0; u < 100; ++u) {
    std::vector<int> joined = split.users[u].train;
    joined.push_back(split.users[u].validation);
    joined.push_back(split.users[u].test);
    CHECK(joined == seqs[u].items);
    CHECK(split.users[u].full() == seqs[u].items);
  }
}

TEST_CASE("negatives: forced outcome, determinism and exhaustion") {
  Rng rng(1);
  const std::vector<int> seen{0};
  for (int i = 0; i < 20; ++i) CHECK(sample_negative(seen, 2, rng) == 1);

  Rng a(99), b(99);
  const std::vector<int> seq{3, 4, 5};
  for (int i = 0; i < 50; ++i) CHECK(sample_negative(seq, 30, a) == sample_negative(seq, 30, b));

  const std::vector<int> all{0, 1};
  CHECK_THROWS_AS(sample_negative(all, 2, rng), DataError);
  const std::vector<int> excluded{2};
  for (int i = 0; i < 20; ++i) CHECK(sample_negative(seen, 4, rng, excluded) != 2);
}

TEST_CASE("negatives: uniform over the unseen items") {
  constexpr int kItems = 1000;
  constexpr int kDraws = 100000;
  std::vector<int> seq;
  for (int i = 0; i < 10; ++i) seq.push_back(i * 97);
  std::vector<int> counts(kItems, 0);
  Rng rng(2024);
  for (int i = 0; i < kDraws; ++i) ++counts[sample_negative(seq, kItems, rng)];

  for (int q : seq) CHECK(counts[q] == 0);
  const int eligible = kItems - static_cast<int>(seq.size());
  const double p = 1.0 / eligible;
  const double expected = kDraws * p;
  const double sigma = std::sqrt(kDraws * p * (1 - p));
  double chi2 = 0.0;
  int worst = 0;
  for (int q = 0; q < kItems; ++q) {
    if (std::find(seq.begin(), seq.end(), q) != seq.end()) continue;
    chi2 += (counts[q] - expected) * (counts[q] - expected) / expected;
    worst = std::max(worst, static_cast<int>(std::abs(counts[q] - expected)));
  }
  // Per-cell bound corrected for 990 simultaneous cells (two-sided 5 sigma).
  CHECK(worst <= 5.0 * sigma);
  // Wilson-Hilferty upper 0.1% quantile of chi-square with eligible-1 dof.
  const double k = eligible - 1;
  const double crit = k * std::pow(1 - 2 / (9 * k) + 3.09 * std::sqrt(2 / (9 * k)), 3);
  CHECK(chi2 < crit);
}

TEST_CASE("training instances: hand-enumerated prefix positions") {
  SplitDataset split{{UserSplit{0, {0, 1, 2}, 3, 4}}};
  Rng rng(5);
  auto inst = build_training_instances(split, 10, 1, rng);
  REQUIRE(inst.size() == 4);
  CHECK(inst[0].history == std::vector<int>{0});
  CHECK(inst[0].candidate == 1);
  CHECK(inst[0].label == 1);
  CHECK(inst[1].label == 0);
  CHECK(inst[2].history == std::vector<int>{0, 1});
  CHECK(inst[2].candidate == 2);
  CHECK(inst[3].label == 0);
}

TEST_CASE("training instances: labels and negatives on random splits") {
  Rng gen(8);
  SplitDataset split;
  for (int u = 0; u < 40; ++u) {
    UserSplit s;
    s.user = u;
    const int len = 1 + static_cast<int>(gen.uniform_index(12));
    for (int k = 0; k < len; ++k) s.train.push_back(static_cast<int>(gen.uniform_index(60)));
    s.validation = static_cast<int>(gen.uniform_index(60));
    s.test = static_cast<int>(gen.uniform_index(60));
    split.users.push_back(s);
  }
  Rng rng(3);
  auto inst = build_training_instances(split, 60, 2, rng);
  std::map<int, std::vector<int>> positives;
  for (const auto& t : inst) {
    const auto full = split.users[t.user].full();
    if (t.label == 1) {
      positives[t.user].push_back(t.candidate);
      CHECK(t.candidate == split.users[t.user].train[t.history.size()]);
    } else {
      CHECK(std::find(full.begin(), full.end(), t.candidate) == full.end());
    }
  }
  for (const auto& s : split.users) {
    std::vector<int> shifted(s.train.begin() + std::min<std::size_t>(1, s.train.size()),
                             s.train.end());
    CHECK(positives[s.user] == shifted);
  }
  CHECK(inst.size() == 3 * [&] {
    std::size_t n = 0;
    for (const auto& s : split.users) n += s.train.size() - 1;
    return n;
  }());
}

TEST_CASE("cold/warm: sizes, tiebreak and manual sort") {
  {
    std::vector<RawEvent> events;
    for (int i = 0; i < 100; ++i) events.emplace_back("u", "i" + std::to_string(i), i);
    InteractionLog log = make_log(events);
    ColdWarmPartition part = partition_cold_warm(log);
    CHECK(part.warm.size() == 35);
    CHECK(part.cold.size() == 35);
    for (int q : part.warm) CHECK_FALSE(part.is_cold(q));
    // Equal frequencies: warm is the first 35 ids in string order.
    std::vector<std::string> ids;
    for (int i = 0; i < 100; ++i) ids.push_back("i" + std::to_string(i));
    std::sort(ids.begin(), ids.end());
    std::set<std::string> expected(ids.begin(), ids.begin() + 35);
    std::set<std::string> warm;
    for (int q : part.warm) warm.insert(log.items.name(q));
    CHECK(warm == expected);
  }
  {
    std::vector<RawEvent> events;
    for (int i = 0; i < 10; ++i) {
      for (int c = 0; c < 10 - i; ++c) events.emplace_back("u", "f" + std::to_string(10 - i), c);
    }
    InteractionLog log = make_log(events);
    ColdWarmPartition part = partition_cold_warm(log, 0.35);
    std::set<std::string> warm, cold;
    for (int q : part.warm) warm.insert(log.items.name(q));
    for (int q : part.cold) cold.insert(log.items.name(q));
    CHECK(warm == std::set<std::string>{"f10", "f9", "f8"});
    CHECK(cold == std::set<std::string>{"f1", "f2", "f3"});
  }
  CHECK_THROWS_AS(partition_cold_warm(make_log({{"u", "a", 1}})), DataError);
  CHECK_THROWS_AS(partition_cold_warm(make_log({{"u", "a", 1}, {"u", "b", 1}}), 0.6),
                  ContractError);
}

TEST_CASE("cold/warm: invariants on random logs") {
  Rng rng(31);
  for (int round = 0; round < 50; ++round) {
    std::vector<RawEvent> events;
    const int items = 2 + static_cast<int>(rng.uniform_index(60));
    const int n = items + static_cast<int>(rng.uniform_index(300));
    for (int e = 0; e < n; ++e) {
      const int q = e < items ? e : static_cast<int>(rng.uniform_index(items));
      events.emplace_back("u", "i" + std::to_string(q), e);
    }
    InteractionLog log = make_log(events);
    ColdWarmPartition part = partition_cold_warm(log);
    const std::size_t k = static_cast<std::size_t>(std::floor(0.35 * items));
    CHECK(part.warm.size() == k);
    CHECK(part.cold.size() == k);
    std::set<int> w(part.warm.begin(), part.warm.end());
    for (int q : part.cold) CHECK(w.count(q) == 0);
    int max_cold = 0, min_warm = n + 1;
    for (int q : part.cold) max_cold = std::max(max_cold, part.frequency[q]);
    for (int q : part.warm) min_warm = std::min(min_warm, part.frequency[q]);
    if (k > 0) CHECK(max_cold <= min_warm);
  }
}
