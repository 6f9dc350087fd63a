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

#include "cotrec/cot.h"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include "cotrec/io.h"
#include "cotrec/text.h"

namespace cotrec {

namespace {

std::string item_text(const std::string& id, const CatalogEntry& e) {
  std::string out = id + ": " + e.title;
  if (!e.description.empty()) out += ". " + e.description;
  return out;
}

const CatalogEntry& catalog_entry(const Catalog& catalog, const std::string& id) {
  auto it = catalog.find(id);
  if (it == catalog.end()) throw DataError("no catalog text for item '" + id + "'");
  return it->second;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string InstructionInstance::profile_text() const {
  std::string out = "Purchase history:";
  for (const auto& line : history) out += "\n" + line;
  return out;
}

std::string InstructionInstance::render() const {
  return instruction + "\n\n" + profile_text() + "\n\nTarget item: " + target_text +
         "\n\nCF prior: " + prior_text;
}

InstructionInstance build_instruction_instance(const std::string& user,
                                               std::span<const std::string> history,
                                               const std::string& target,
                                               const std::string& prior_text,
                                               const Catalog& catalog, std::size_t k_prompt,
                                               int label) {
  if (history.empty()) throw ContractError("instruction instance needs a non-empty history");
  if (k_prompt == 0) throw ConfigError("cot.k_prompt must be positive");
  if (prior_text.empty()) throw ContractError("instruction instance needs a prior text");
  InstructionInstance inst;
  inst.user = user;
  inst.target = target;
  inst.label = label;
  inst.instruction = std::string(kTaskInstruction);
  inst.target_text = item_text(target, catalog_entry(catalog, target));
  inst.prior_text = prior_text;
  const std::size_t begin = history.size() > k_prompt ? history.size() - k_prompt : 0;
  // Re-interactions are annotated against everything seen earlier, including
  // items that fell outside the prompt window.
  std::set<std::string> seen(history.begin(), history.begin() + begin);
  for (std::size_t i = begin; i < history.size(); ++i) {
    const std::string& id = history[i];
    const CatalogEntry& e = catalog_entry(catalog, id);
    std::string line = id + ": " + e.title;
    if (!seen.insert(id).second) line += " (re-watch)";
    inst.history.push_back(std::move(line));
  }
  return inst;
}

namespace {

FixtureCorpus parse_keyed(std::string_view text, std::size_t fields) {
  FixtureCorpus corpus;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || line.front() == '#') continue;
    std::vector<std::string_view> parts = split(line, '\t');
    if (parts.size() != fields) {
      throw ParseError(line_no, "expected " + std::to_string(fields) + " tab-separated fields, got " +
                                    std::to_string(parts.size()));
    }
    if (fields == 4 && trim(parts[2]) != "0" && trim(parts[2]) != "1") {
      throw ParseError(line_no, "label must be 0 or 1");
    }
    corpus[{std::string(trim(parts[0])), std::string(trim(parts[1]))}] =
        unescape_field(parts.back());
  }
  return corpus;
}

}  // namespace

FixtureCorpus parse_cot_fixtures(std::string_view text) { return parse_keyed(text, 4); }

FixtureCorpus parse_text_fixtures(std::string_view text) { return parse_keyed(text, 3); }

std::string serialize_cot_fixture_line(const std::string& user, const std::string& item,
                                       int label, const std::string& text) {
  return user + "\t" + item + "\t" + std::to_string(label) + "\t" + escape_field(text) + "\n";
}

const std::string kDefaultCotTemplate =
    "{instance}\n\n"
    "Step 1. Describe the user profile implied by the history.\n"
    "Step 2. Compare the target item with that profile.\n"
    "Step 3. Check consistency with the CF prior and conclude that {label}.";

std::string render_prompt(std::string_view prompt_template, const InstructionInstance& instance) {
  std::string out(prompt_template);
  auto replace = [&](std::string_view key, const std::string& value) {
    for (std::size_t pos = out.find(key); pos != std::string::npos;
         pos = out.find(key, pos + value.size())) {
      out.replace(pos, key.size(), value);
    }
  };
  replace("{instance}", instance.render());
  replace("{label}", std::string(instance.label ? kPositiveLabelSentence
                                                : kNegativeLabelSentence));
  return out;
}

std::string template_cot(const InstructionInstance& instance) {
  std::string titles;
  for (std::size_t i = 0; i < instance.history.size(); ++i) {
    const std::string& line = instance.history[i];
    const auto colon = line.find(": ");
    titles += (i ? ", " : "") + (colon == std::string::npos ? line : line.substr(colon + 2));
  }
  std::string title = instance.target_text;
  std::string detail;
  if (const auto colon = title.find(": "); colon != std::string::npos) {
    title = title.substr(colon + 2);
  }
  if (const auto dot = title.find(". "); dot != std::string::npos) {
    detail = title.substr(dot + 2);
    title = title.substr(0, dot);
  }
  std::ostringstream os;
  if (instance.label) {
    os << "The profile favors " << titles << ". " << title << " (" << instance.target
       << ") matches this profile";
    if (!detail.empty()) os << " through " << detail;
    os << "; " << instance.prior_text << ". The user will interact with the target item.";
  } else {
    os << "The history centers on " << titles << ". " << title << " (" << instance.target
       << ") is a weak fit";
    if (!detail.empty()) os << " given " << detail;
    os << "; the " << instance.prior_text
       << " is viewed cautiously. The user will not interact with the target item.";
  }
  return os.str();
}

std::string FixtureAdapter::complete(const std::string& user, const std::string& item,
                                     const InstructionInstance* instance,
                                     const std::string& /*prompt*/) {
  ++calls_;
  auto it = corpus_.find({user, item});
  if (it != corpus_.end()) return it->second;
  if (template_fallback_ && instance) return template_cot(*instance);
  throw MissingFixtureError(user, item);
}

std::string generate_cot(GenerationAdapter& adapter, const InstructionInstance& instance,
                         std::string_view prompt_template) {
  const std::string prompt = render_prompt(prompt_template, instance);
  return truncate_tokens(adapter.complete(instance.user, instance.target, &instance, prompt),
                         kMaxCotTokens);
}

double score_coherence(std::string_view cot) {
  const std::vector<std::string> sentences = split_sentences(cot);
  if (sentences.empty()) return 0.0;
  std::vector<double> polarity;
  std::map<std::vector<std::string>, int> grams;
  std::size_t total = 0;
  for (const std::string& s : sentences) {
    polarity.push_back(sentence_polarity(s));
    const std::vector<std::string> words = word_tokens(s);
    for (std::size_t i = 0; i + 3 <= words.size(); ++i) {
      ++grams[{words[i], words[i + 1], words[i + 2]}];
      ++total;
    }
  }
  double mean = 0.0;
  for (double p : polarity) mean += p;
  mean /= static_cast<double>(polarity.size());
  double variance = 0.0;
  for (double p : polarity) variance += (p - mean) * (p - mean);
  variance /= static_cast<double>(polarity.size());
  const double repetition =
      total ? static_cast<double>(total - grams.size()) / static_cast<double>(total) : 0.0;
  return std::clamp(1.0 - 0.5 * variance - 0.5 * repetition, 0.0, 1.0);
}

namespace {

struct Mention {
  std::size_t sentence;
  std::size_t position;
  std::size_t candidate;
};

std::size_t find_token(const std::string& haystack, const std::string& needle) {
  // Whole-token match: neighbours must not be alphanumeric.
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + 1)) {
    const bool left = pos == 0 || !std::isalnum(static_cast<unsigned char>(haystack[pos - 1]));
    const std::size_t end = pos + needle.size();
    const bool right =
        end == haystack.size() || !std::isalnum(static_cast<unsigned char>(haystack[end]));
    if (left && right) return pos;
  }
  return std::string::npos;
}

}  // namespace

std::optional<std::string> named_candidate(std::string_view cot,
                                           const InstructionInstance& instance) {
  static const std::regex kPercent(R"((\d+(?:\.\d+)?)\s*%)");
  const std::vector<std::string> sentences = split_sentences(cot);
  bool any_mention = false;
  std::optional<std::size_t> best;
  double best_percent = -1.0;
  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const std::string text = lower(sentences[si]);
    std::vector<Mention> mentions;
    for (std::size_t c = 0; c < instance.candidates.size(); ++c) {
      const Candidate& cand = instance.candidates[c];
      std::size_t pos = find_token(text, lower(cand.item));
      if (!cand.title.empty()) pos = std::min(pos, find_token(text, lower(cand.title)));
      if (pos != std::string::npos) mentions.push_back({si, pos, c});
    }
    if (mentions.empty()) continue;
    any_mention = true;
    if (sentence_polarity(sentences[si]) < 0.0) continue;
    std::sort(mentions.begin(), mentions.end(),
              [](const Mention& a, const Mention& b) { return a.position < b.position; });
    for (std::size_t m = 0; m < mentions.size(); ++m) {
      const std::size_t from = mentions[m].position;
      const std::size_t to = m + 1 < mentions.size() ? mentions[m + 1].position : text.size();
      const std::string span = text.substr(from, to - from);
      std::smatch match;
      double percent = -1.0;
      if (std::regex_search(span, match, kPercent)) percent = parse_double(match[1].str());
      if (!best || percent > best_percent) {
        best = mentions[m].candidate;
        best_percent = percent;
      }
    }
  }
  if (!any_mention) return std::nullopt;
  if (!best) return std::string();
  return instance.candidates[*best].item;
}

double rank_agreement(std::string_view cot, const InstructionInstance& instance) {
  const std::optional<std::string> named = named_candidate(cot, instance);
  if (!named) return 0.5;
  return !named->empty() && *named == instance.cf_top ? 1.0 : 0.0;
}

double score_semantic_dimension(SemanticDimension dim, std::string_view cot,
                                const InstructionInstance& instance,
                                const TextEmbedder& embedder) {
  if (!embedder) throw DependencyError("no text embedder configured");
  if (whitespace_tokens(cot).empty()) return 0.0;
  const Eigen::VectorXd c = embedder(cot);
  switch (dim) {
    case SemanticDimension::kCompleteness:
      return mapped_similarity(c, embedder(instance.profile_text() + "\n" + instance.target_text +
                                           "\n" + instance.prior_text));
    case SemanticDimension::kRelevance:
      return mapped_similarity(c, embedder(instance.render()));
    case SemanticDimension::kConsistency: {
      const std::vector<std::string> sentences = split_sentences(cot);
      const std::string_view label =
          instance.label ? kPositiveLabelSentence : kNegativeLabelSentence;
      const double match = mapped_similarity(embedder(sentences.back()), embedder(label));
      return 0.5 * match + 0.5 * rank_agreement(cot, instance);
    }
  }
  return 0.0;
}

double composite_score(const std::array<double, 4>& dims, const CotWeights& weights) {
  double weight_sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("cot weights must lie in [0, 1]");
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-9) {
    throw ConfigError("cot weights must sum to 1, got " + format_double(weight_sum));
  }
  double score = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    if (!(dims[j] >= 0.0 && dims[j] <= 1.0)) {
      throw ContractError("cot dimension " + std::to_string(j + 1) + " outside [0, 1]");
    }
    score += weights[j] * dims[j];
  }
  return score;
}

CotRecord score_cot(const InstructionInstance& instance, std::string cot,
                    const TextEmbedder& embedder, const CotWeights& weights, double threshold) {
  CotRecord rec;
  rec.instance = instance;
  rec.cot = std::move(cot);
  rec.dims = {score_coherence(rec.cot),
              score_semantic_dimension(SemanticDimension::kCompleteness, rec.cot, instance,
                                       embedder),
              score_semantic_dimension(SemanticDimension::kRelevance, rec.cot, instance, embedder),
              score_semantic_dimension(SemanticDimension::kConsistency, rec.cot, instance,
                                       embedder)};
  rec.score = composite_score(rec.dims, weights);
  rec.retained = rec.score >= threshold;
  return rec;
}

FilterResult filter_cots(std::span<const CotRecord> records, double threshold) {
  if (records.empty()) throw ContractError("coverage is undefined for an empty record set");
  FilterResult out;
  for (const CotRecord& r : records) {
    if (r.score >= threshold) {
      out.retained.push_back(r);
      out.retained.back().retained = true;
    }
  }
  out.coverage = static_cast<double>(out.retained.size()) / static_cast<double>(records.size());
  return out;
}

std::vector<SweepRow> threshold_sweep(std::span<const CotRecord> records,
                                      std::span<const double> thresholds,
                                      const DownstreamEval& downstream) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ContractError("sweep thresholds must be sorted ascending");
  }
  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    FilterResult f = filter_cots(records, t);
    SweepRow row{t, f.coverage, f.retained.size(), std::nullopt};
    if (downstream) row.downstream = downstream(f.retained);
    rows.push_back(row);
  }
  return rows;
}

std::string serialize_sweep(std::span<const SweepRow> rows) {
  std::string out = "threshold\tcoverage\tretained\thr@1\trouge_l\n";
  for (const SweepRow& r : rows) {
    out += format_double(r.threshold) + "\t" + format_double(r.coverage) + "\t" +
           std::to_string(r.retained) + "\t";
    if (r.downstream) {
      out += format_double(r.downstream->hr1) + "\t" + format_double(r.downstream->rouge_l);
    } else {
      out += "-\t-";
    }
    out += "\n";
  }
  return out;
}

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "\n" : "") + lines[i];
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  for (std::string_view s : split(text, '\n')) out.emplace_back(s);
  return out;
}

constexpr std::size_t kRecordFields = 15;

}  // namespace

std::string serialize_cot_records(std::span<const CotRecord> records) {
  std::string out =
      "#user\ttarget\tlabel\tscore\tcoherence\tcompleteness\trelevance\tconsistency\tretained"
      "\tcf_top\tcandidates\thistory\ttarget_text\tprior_text\tcot\n";
  for (const CotRecord& r : records) {
    const InstructionInstance& in = r.instance;
    std::vector<std::string> cands;
    for (const Candidate& c : in.candidates) cands.push_back(c.item + "\t" + c.title);
    std::vector<std::string> f = {in.user,
                                  in.target,
                                  std::to_string(in.label),
                                  format_double(r.score),
                                  format_double(r.dims[0]),
                                  format_double(r.dims[1]),
                                  format_double(r.dims[2]),
                                  format_double(r.dims[3]),
                                  r.retained ? "1" : "0",
                                  in.cf_top,
                                  join_lines(cands),
                                  join_lines(in.history),
                                  in.target_text,
                                  in.prior_text,
                                  r.cot};
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "\t" : "") + escape_field(f[i]);
    out += "\n";
  }
  return out;
}

std::vector<CotRecord> parse_cot_records(std::string_view text) {
  std::vector<CotRecord> out;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> parts = split(line, '\t');
    if (parts.size() != kRecordFields) throw ParseError(line_no, "malformed cot record");
    std::vector<std::string> f;
    for (auto p : parts) f.push_back(unescape_field(p));
    CotRecord r;
    InstructionInstance& in = r.instance;
    in.user = f[0];
    in.target = f[1];
    in.label = f[2] == "1" ? 1 : 0;
    r.score = parse_double(f[3]);
    for (int j = 0; j < 4; ++j) r.dims[j] = parse_double(f[4 + j]);
    r.retained = f[8] == "1";
    in.cf_top = f[9];
    for (const std::string& c : split_lines(f[10])) {
      const auto tab = c.find('\t');
      if (tab == std::string::npos) throw ParseError(line_no, "malformed candidate list");
      in.candidates.push_back({c.substr(0, tab), c.substr(tab + 1)});
    }
    in.history = split_lines(f[11]);
    in.target_text = f[12];
    in.prior_text = f[13];
    in.instruction = std::string(kTaskInstruction);
    r.cot = f[14];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cotrec
