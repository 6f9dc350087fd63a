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

#include "cotrec/text.h"

#include <cctype>

namespace cotrec {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '%' || u >= 0x80;
}

}  // namespace

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string truncate_tokens(std::string_view text, std::size_t max_tokens) {
  std::vector<std::string> tokens = whitespace_tokens(text);
  if (tokens.size() <= max_tokens) return std::string(text);
  std::string out;
  for (std::size_t i = 0; i < max_tokens; ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (const std::string& raw : whitespace_tokens(text)) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && !is_word_char(raw[b])) ++b;
    while (e > b && !is_word_char(raw[e - 1])) --e;
    if (b == e) continue;
    std::string tok;
    for (std::size_t k = b; k < e; ++k) {
      tok += static_cast<char>(std::tolower(static_cast<unsigned char>(raw[k])));
    }
    out.push_back(std::move(tok));
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    std::string_view s = text.substr(start, end - start);
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    if (!s.empty()) out.emplace_back(s);
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '?' || c == '!') && (i + 1 == text.size() || is_space(text[i + 1]))) {
      emit(i + 1);
      start = i + 1;
    }
  }
  if (start < text.size()) emit(text.size());
  return out;
}

double sentence_polarity(std::string_view sentence) {
  double sum = 0.0;
  int covered = 0;
  for (const std::string& w : word_tokens(sentence)) {
    if (auto p = word_polarity(w)) {
      sum += *p;
      ++covered;
    }
  }
  return covered ? sum / covered : 0.0;
}

}  // namespace cotrec
