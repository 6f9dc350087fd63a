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

#include "cotrec/config.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>

#include "cotrec/errors.h"
#include "cotrec/io.h"

namespace cotrec {
namespace {

namespace fs = std::filesystem;

struct Field {
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expect) {
  throw ConfigError(std::string(key) + ": expected " + expect + ", got '" + std::string(value) +
                    "'");
}

long long to_integer(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

double to_real(std::string_view key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const Error&) {
    bad_value(key, v, "a number");
  }
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  bad_value(key, v, "true or false");
}

template <class Access>
Field int_field(const char* key, Access access) {
  return {key, [access](const RunConfig& c) {
            return std::to_string(access(const_cast<RunConfig&>(c)));
          },
          [access, key](RunConfig& c, std::string_view v) {
            const long long x = to_integer(key, v);
            using T = std::remove_reference_t<decltype(access(c))>;
            if (x < static_cast<long long>(std::numeric_limits<T>::min()) ||
                (x > 0 && static_cast<unsigned long long>(x) > std::numeric_limits<T>::max())) {
              bad_value(key, v, "an integer in range");
            }
            access(c) = static_cast<T>(x);
          }};
}

template <class Access>
Field real_field(const char* key, Access access) {
  return {key, [access](const RunConfig& c) { return format_double(access(const_cast<RunConfig&>(c))); },
          [access, key](RunConfig& c, std::string_view v) { access(c) = to_real(key, v); }};
}

template <class Access>
Field bool_field(const char* key, Access access) {
  return {key,
          [access](const RunConfig& c) -> std::string {
            return access(const_cast<RunConfig&>(c)) ? "true" : "false";
          },
          [access, key](RunConfig& c, std::string_view v) { access(c) = to_bool(key, v); }};
}

template <class Access>
Field string_field(const char* key, Access access) {
  return {key, [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)); },
          [access](RunConfig& c, std::string_view v) { access(c) = std::string(v); }};
}

template <class Access>
Field path_field(const char* key, Access access) {
  return {key,
          [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)).string(); },
          [access](RunConfig& c, std::string_view v) { access(c) = fs::path(std::string(v)); }};
}

template <class T, class Parse>
std::string join_list(const std::vector<T>& xs, Parse fmt) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + fmt(xs[i]);
  return out;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      path_field("paths.interactions", [](RunConfig& c) -> fs::path& { return c.paths.interactions; }),
      path_field("paths.catalog", [](RunConfig& c) -> fs::path& { return c.paths.catalog; }),
      path_field("paths.embeddings", [](RunConfig& c) -> fs::path& { return c.paths.embeddings; }),
      path_field("paths.cot_fixtures", [](RunConfig& c) -> fs::path& { return c.paths.cot_fixtures; }),
      path_field("paths.explanations", [](RunConfig& c) -> fs::path& { return c.paths.explanations; }),
      path_field("paths.references", [](RunConfig& c) -> fs::path& { return c.paths.references; }),
      path_field("paths.out", [](RunConfig& c) -> fs::path& { return c.paths.out; }),
      path_field("paths.zero_shot.interactions",
                 [](RunConfig& c) -> fs::path& { return c.paths.zero_shot_interactions; }),
      path_field("paths.zero_shot.catalog",
                 [](RunConfig& c) -> fs::path& { return c.paths.zero_shot_catalog; }),
      path_field("paths.zero_shot.embeddings",
                 [](RunConfig& c) -> fs::path& { return c.paths.zero_shot_embeddings; }),
      int_field("seed", [](RunConfig& c) -> std::uint64_t& { return c.seed; }),
      int_field("data.min_user_events", [](RunConfig& c) -> int& { return c.min_user_events; }),
      int_field("data.min_item_popularity", [](RunConfig& c) -> int& { return c.min_item_popularity; }),
      int_field("data.negatives", [](RunConfig& c) -> int& { return c.negatives; }),
      real_field("data.cold_fraction", [](RunConfig& c) -> double& { return c.cold_fraction; }),
      bool_field("data.hold_out_cold", [](RunConfig& c) -> bool& { return c.hold_out_cold; }),
      int_field("cf.embed_dim", [](RunConfig& c) -> int& { return c.cf.embed_dim; }),
      int_field("cf.max_history", [](RunConfig& c) -> int& { return c.cf.max_history; }),
      int_field("cf.blocks", [](RunConfig& c) -> int& { return c.cf.blocks; }),
      int_field("cf.heads", [](RunConfig& c) -> int& { return c.cf.heads; }),
      real_field("cf.dropout", [](RunConfig& c) -> double& { return c.cf.dropout; }),
      int_field("cf.epochs", [](RunConfig& c) -> int& { return c.cf.epochs; }),
      int_field("cf.batch_size", [](RunConfig& c) -> int& { return c.cf.batch_size; }),
      real_field("cf.lr", [](RunConfig& c) -> double& { return c.cf.learning_rate; }),
      real_field("align.alpha", [](RunConfig& c) -> double& { return c.alpha; }),
      real_field("align.beta", [](RunConfig& c) -> double& { return c.beta; }),
      int_field("align.latent_dim", [](RunConfig& c) -> int& { return c.latent_dim; }),
      int_field("align.epochs", [](RunConfig& c) -> int& { return c.align.epochs; }),
      int_field("align.batch_size", [](RunConfig& c) -> int& { return c.align.batch_size; }),
      real_field("align.lr", [](RunConfig& c) -> double& { return c.align.learning_rate; }),
      {"align.optimizer",
       [](const RunConfig& c) { return optimizer_kind_name(c.align.optimizer); },
       [](RunConfig& c, std::string_view v) {
         try {
           c.align.optimizer = parse_optimizer_kind(std::string(v));
         } catch (const Error&) {
           bad_value("align.optimizer", v, "sgd or adam");
         }
       }},
      real_field("cot.threshold", [](RunConfig& c) -> double& { return c.cot_threshold; }),
      {"cot.weights",
       [](const RunConfig& c) {
         return join_list(std::vector<double>(c.cot_weights.begin(), c.cot_weights.end()),
                          [](double x) { return format_double(x); });
       },
       [](RunConfig& c, std::string_view v) {
         const auto parts = split(v, ',');
         if (parts.size() != 4) bad_value("cot.weights", v, "four comma-separated numbers");
         for (std::size_t i = 0; i < 4; ++i) c.cot_weights[i] = to_real("cot.weights", trim(parts[i]));
       }},
      int_field("cot.k_prompt", [](RunConfig& c) -> int& { return c.k_prompt; }),
      int_field("cot.samples", [](RunConfig& c) -> int& { return c.cot_samples; }),
      int_field("cot.candidates", [](RunConfig& c) -> int& { return c.cot_candidates; }),
      string_field("cot.adapter", [](RunConfig& c) -> std::string& { return c.cot_adapter; }),
      bool_field("cot.template_fallback", [](RunConfig& c) -> bool& { return c.cot_template_fallback; }),
      string_field("cot.remote.host", [](RunConfig& c) -> std::string& { return c.remote.host; }),
      int_field("cot.remote.port", [](RunConfig& c) -> int& { return c.remote.port; }),
      string_field("cot.remote.path", [](RunConfig& c) -> std::string& { return c.remote.path; }),
      int_field("cot.remote.max_attempts", [](RunConfig& c) -> int& { return c.remote.max_attempts; }),
      int_field("cot.remote.timeout_seconds",
                [](RunConfig& c) -> int& { return c.remote.timeout_seconds; }),
      int_field("proj.token_dim", [](RunConfig& c) -> int& { return c.token_dim; }),
      int_field("proj.hidden", [](RunConfig& c) -> int& { return c.proj_hidden; }),
      int_field("proj.epochs", [](RunConfig& c) -> int& { return c.proj.epochs; }),
      int_field("proj.batch_size", [](RunConfig& c) -> int& { return c.proj.batch_size; }),
      real_field("proj.lr", [](RunConfig& c) -> double& { return c.proj.learning_rate; }),
      {"proj.optimizer", [](const RunConfig& c) { return optimizer_kind_name(c.proj.optimizer); },
       [](RunConfig& c, std::string_view v) {
         try {
           c.proj.optimizer = parse_optimizer_kind(std::string(v));
         } catch (const Error&) {
           bad_value("proj.optimizer", v, "sgd or adam");
         }
       }},
      int_field("proj.candidates", [](RunConfig& c) -> int& { return c.proj_candidates; }),
      {"eval.ks",
       [](const RunConfig& c) { return join_list(c.ks, [](int k) { return std::to_string(k); }); },
       [](RunConfig& c, std::string_view v) {
         c.ks.clear();
         for (std::string_view p : split(v, ',')) c.ks.push_back(static_cast<int>(to_integer("eval.ks", trim(p))));
       }},
      int_field("eval.pool_size", [](RunConfig& c) -> int& { return c.pool_size; }),
      string_field("eval.ranker", [](RunConfig& c) -> std::string& { return c.ranker; }),
      {"sweep.thresholds",
       [](const RunConfig& c) {
         return join_list(c.sweep_thresholds, [](double x) { return format_double(x); });
       },
       [](RunConfig& c, std::string_view v) {
         c.sweep_thresholds.clear();
         for (std::string_view p : split(v, ',')) {
           c.sweep_thresholds.push_back(to_real("sweep.thresholds", trim(p)));
         }
       }},
      bool_field("sweep.downstream", [](RunConfig& c) -> bool& { return c.sweep_downstream; }),
  };
  return table;
}

void require(bool ok, const char* key, const std::string& rule) {
  if (!ok) throw ConfigError(std::string(key) + ": " + rule);
}

bool unit_open_closed(double x) { return x > 0.0 && x <= 1.0; }

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  for (const Field& f : fields()) {
    if (key == f.key) {
      f.set(*this, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void RunConfig::validate() const {
  const std::pair<const char*, const fs::path*> path_keys[] = {
      {"paths.interactions", &paths.interactions},
      {"paths.catalog", &paths.catalog},
      {"paths.embeddings", &paths.embeddings},
      {"paths.cot_fixtures", &paths.cot_fixtures},
      {"paths.explanations", &paths.explanations},
      {"paths.references", &paths.references},
      {"paths.zero_shot.interactions", &paths.zero_shot_interactions},
      {"paths.zero_shot.catalog", &paths.zero_shot_catalog},
      {"paths.zero_shot.embeddings", &paths.zero_shot_embeddings},
  };
  for (const auto& [key, p] : path_keys) {
    if (!p->empty() && !fs::exists(*p)) {
      throw ConfigError(std::string(key) + ": file '" + p->string() + "' does not exist");
    }
  }
  require(!paths.interactions.empty(), "paths.interactions", "required");
  require(!paths.catalog.empty(), "paths.catalog", "required");
  require(!paths.out.empty(), "paths.out", "required");
  const bool zs = !paths.zero_shot_interactions.empty();
  require(zs == !paths.zero_shot_catalog.empty() && zs == !paths.zero_shot_embeddings.empty(),
          "paths.zero_shot", "interactions, catalog and embeddings must be set together");

  require(min_user_events >= 3, "data.min_user_events", "must be >= 3");
  require(min_item_popularity >= 1, "data.min_item_popularity", "must be >= 1");
  require(negatives >= 1 && negatives <= 100, "data.negatives", "must be in [1, 100]");
  require(cold_fraction > 0.0 && cold_fraction <= 0.5, "data.cold_fraction", "must be in (0, 0.5]");

  require(cf.embed_dim >= 1 && cf.embed_dim <= 1024, "cf.embed_dim", "must be in [1, 1024]");
  require(cf.max_history >= 1, "cf.max_history", "must be >= 1");
  require(cf.blocks >= 1, "cf.blocks", "must be >= 1");
  require(cf.heads >= 1 && cf.embed_dim % cf.heads == 0, "cf.heads",
          "must be >= 1 and divide cf.embed_dim");
  require(cf.dropout >= 0.0 && cf.dropout < 1.0, "cf.dropout", "must be in [0, 1)");
  require(cf.epochs >= 0, "cf.epochs", "must be >= 0");
  require(cf.batch_size >= 1, "cf.batch_size", "must be >= 1");
  require(cf.learning_rate >= 0.0 && std::isfinite(cf.learning_rate), "cf.lr", "must be >= 0");

  require(unit_open_closed(alpha), "align.alpha", "must be in (0, 1]");
  require(unit_open_closed(beta), "align.beta", "must be in (0, 1]");
  require(latent_dim >= 1, "align.latent_dim", "must be >= 1");
  require(align.epochs >= 0, "align.epochs", "must be >= 0");
  require(align.batch_size >= 1, "align.batch_size", "must be >= 1");
  require(align.learning_rate >= 0.0 && std::isfinite(align.learning_rate), "align.lr",
          "must be >= 0");

  require(cot_threshold >= 0.0 && cot_threshold <= 1.0, "cot.threshold", "must be in [0, 1]");
  double wsum = 0.0;
  for (double w : cot_weights) {
    require(w >= 0.0, "cot.weights", "must be non-negative");
    wsum += w;
  }
  require(std::abs(wsum - 1.0) <= 1e-9, "cot.weights", "must sum to 1");
  require(k_prompt >= 1, "cot.k_prompt", "must be >= 1");
  require(cot_samples >= 1, "cot.samples", "must be >= 1");
  require(cot_candidates >= 1, "cot.candidates", "must be >= 1");
  require(cot_adapter == "fixture" || cot_adapter == "remote", "cot.adapter",
          "must be fixture or remote");
  require(cot_adapter != "fixture" || !paths.cot_fixtures.empty() || cot_template_fallback,
          "paths.cot_fixtures", "required by the fixture adapter without template fallback");
  require(remote.port >= 1 && remote.port <= 65535, "cot.remote.port", "must be in [1, 65535]");
  require(remote.max_attempts >= 1, "cot.remote.max_attempts", "must be >= 1");
  require(remote.timeout_seconds >= 1, "cot.remote.timeout_seconds", "must be >= 1");

  require(token_dim >= 1, "proj.token_dim", "must be >= 1");
  require(proj_hidden >= 1, "proj.hidden", "must be >= 1");
  require(proj.epochs >= 0, "proj.epochs", "must be >= 0");
  require(proj.batch_size >= 1, "proj.batch_size", "must be >= 1");
  require(proj.learning_rate >= 0.0 && std::isfinite(proj.learning_rate), "proj.lr",
          "must be >= 0");
  require(proj_candidates >= 1, "proj.candidates", "must be >= 1");

  require(!ks.empty(), "eval.ks", "must not be empty");
  for (int k : ks) require(k >= 1, "eval.ks", "entries must be >= 1");
  require(pool_size >= *std::max_element(ks.begin(), ks.end()), "eval.pool_size",
          "must be at least the largest k");
  require(ranker == "aligned" || ranker == "cf" || ranker == "surrogate", "eval.ranker",
          "must be aligned, cf or surrogate");

  require(!sweep_thresholds.empty(), "sweep.thresholds", "must not be empty");
  for (std::size_t i = 0; i < sweep_thresholds.size(); ++i) {
    require(sweep_thresholds[i] >= 0.0 && sweep_thresholds[i] <= 1.0, "sweep.thresholds",
            "entries must be in [0, 1]");
    require(i == 0 || sweep_thresholds[i] > sweep_thresholds[i - 1], "sweep.thresholds",
            "must be strictly ascending");
  }
}

std::string RunConfig::serialize() const {
  std::string out;
  for (const Field& f : fields()) out += std::string(f.key) + " = " + f.get(*this) + "\n";
  return out;
}

std::string RunConfig::digest() const {
  Digest d;
  for (const Field& f : fields()) {
    const std::string_view key = f.key;
    if (key == "paths.out") continue;
    if (key.starts_with("paths.")) {
      // Inputs enter by content, so the digest does not depend on where they live.
      const fs::path p(f.get(*this));
      d.update(key).update("=");
      if (!p.empty() && fs::exists(p)) d.update(Digest().update(read_file(p)).hex());
      d.update("\n");
      continue;
    }
    d.update(key).update("=").update(f.get(*this)).update("\n");
  }
  return d.hex();
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  RunConfig cfg;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    cfg.set(key, value);
    if (key.starts_with("paths.") && !value.empty() && !base_dir.empty()) {
      for (const Field& f : fields()) {
        if (key != f.key) continue;
        const fs::path p(std::string{value});
        if (p.is_relative()) f.set(cfg, (base_dir / p).lexically_normal().string());
      }
    }
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  return parse_run_config(read_file(path), path.parent_path());
}

}  // namespace cotrec
