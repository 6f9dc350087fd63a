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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cotrec {

/// Whitespace-separated tokens, verbatim.
std::vector<std::string> whitespace_tokens(std::string_view text);

/// First `max_tokens` whitespace tokens joined by single spaces; text with at
/// most `max_tokens` tokens is returned unchanged.
std::string truncate_tokens(std::string_view text, std::size_t max_tokens);

/// Lowercased words with leading/trailing punctuation stripped. Inner
/// punctuation is kept, so "q12" and "88%" survive as single tokens.
std::vector<std::string> word_tokens(std::string_view text);

/// Sentences ending at [.?!] followed by whitespace or end of text. Empty
/// fragments are dropped; trailing text without a terminator forms a sentence.
std::vector<std::string> split_sentences(std::string_view text);

/// Signed polarity in [-1, 1] from the bundled word list, nullopt for words it
/// does not cover.
std::optional<double> word_polarity(std::string_view word);

/// Mean polarity of covered words in the sentence; 0 when none is covered.
double sentence_polarity(std::string_view sentence);

}  // namespace cotrec
