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

#include <string>
#include <string_view>
#include <unordered_map>

#include "cotrec/text.h"

namespace cotrec {

namespace {

// Hand-curated list. Includes the verbs reasoning traces use to endorse or
// discount a candidate.
const std::unordered_map<std::string_view, double>& lexicon() {
  static const std::unordered_map<std::string_view, double> words = {
      {"good", 0.7},        {"great", 0.8},        {"excellent", 1.0},
      {"best", 1.0},        {"better", 0.5},       {"love", 0.5},
      {"loves", 0.5},       {"loved", 0.7},        {"like", 0.3},
      {"likes", 0.3},       {"liked", 0.3},        {"enjoy", 0.4},
      {"enjoys", 0.4},      {"enjoyed", 0.4},      {"favorite", 0.5},
      {"favors", 0.5},      {"favor", 0.5},        {"prefers", 0.3},
      {"preference", 0.2},  {"strong", 0.4},       {"strongly", 0.4},
      {"durable", 0.3},     {"steady", 0.3},       {"smooth", 0.4},
      {"clear", 0.1},       {"clearly", 0.2},      {"fits", 0.4},
      {"fit", 0.4},         {"matches", 0.5},      {"match", 0.5},
      {"aligns", 0.5},      {"aligned", 0.5},      {"consistent", 0.5},
      {"reinforces", 0.4},  {"supports", 0.4},     {"confirms", 0.5},
      {"sustaining", 0.3},  {"preserving", 0.2},   {"relevant", 0.4},
      {"appealing", 0.6},   {"appeal", 0.4},       {"interest", 0.2},
      {"interested", 0.3},  {"recommended", 0.4},  {"recommend", 0.4},
      {"high", 0.16},       {"novelty", 0.2},      {"fresh", 0.3},
      {"fun", 0.3},         {"happy", 0.8},        {"perfect", 1.0},
      {"solid", 0.3},       {"reliable", 0.4},     {"useful", 0.4},
      {"helpful", 0.5},     {"nice", 0.6},         {"quality", 0.2},
      {"bad", -0.7},        {"worse", -0.4},       {"worst", -1.0},
      {"poor", -0.4},       {"weak", -0.4},        {"hate", -0.8},
      {"dislike", -0.5},    {"dislikes", -0.5},    {"boring", -1.0},
      {"dull", -0.3},       {"fatigue", -0.5},     {"drag", -0.4},
      {"dampen", -0.4},     {"dampens", -0.4},     {"mute", -0.3},
      {"cautiously", -0.3}, {"doubtful", -0.5},    {"unlikely", -0.5},
      {"de-emphasized", -0.4}, {"contradicts", -0.5}, {"mismatch", -0.5},
      {"drifting", -0.2},   {"drifts", -0.2},      {"fragmented", -0.4},
      {"slower", -0.2},     {"misses", -0.4},      {"lacks", -0.4},
      {"lacking", -0.4},    {"unclear", -0.2},     {"wrong", -0.5},
      {"broken", -0.4},     {"disappointing", -0.6}, {"annoying", -0.8},
      {"avoid", -0.4},      {"avoids", -0.4},      {"not", -0.3},
      {"never", -0.3},      {"no", -0.2},          {"terrible", -1.0},
      {"awful", -1.0},      {"cheap", -0.1},       {"fails", -0.5},
  };
  return words;
}

}  // namespace

std::optional<double> word_polarity(std::string_view word) {
  const auto& words = lexicon();
  auto it = words.find(word);
  if (it == words.end()) return std::nullopt;
  return it->second;
}

}  // namespace cotrec
