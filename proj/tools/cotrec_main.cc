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

#include <CLI11.hpp>

#include <iostream>

#include "cotrec/config.h"
#include "cotrec/errors.h"
#include "cotrec/pipeline.h"

int main(int argc, char** argv) {
  CLI::App app{"Sequential recommendation pipeline with unified embeddings and CoT filtering"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool force = false;
  bool quiet = false;
  std::vector<std::string> overrides;

  std::vector<std::string> names = {"all"};
  for (cotrec::Stage s : cotrec::all_stages()) names.push_back(cotrec::to_string(s));
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(
        name, name == "all" ? "run every stage from prepare to report" : "run the " + name + " stage");
    sub->add_option("--config", config_path, "run config file (dotted key = value lines)")
        ->required();
    sub->add_option("--out", out, "output directory (overrides paths.out)");
    sub->add_option("--seed", seed, "seed (overrides seed)");
    sub->add_option("--set", overrides, "extra key=value assignments")->take_all();
    sub->add_flag("--force", force, "replace artifacts whose content changed");
    sub->add_flag("-q,--quiet", quiet, "only print errors");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    cotrec::RunConfig cfg = cotrec::load_run_config(config_path);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw cotrec::ConfigError("--set expects key=value, got '" + kv + "'");
      cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!out.empty()) cfg.paths.out = out;
    if (app.get_subcommands().front()->count("--seed")) cfg.seed = seed;

    cotrec::RunOptions opts;
    opts.force = force;
    opts.log = quiet ? nullptr : &std::cerr;
    std::vector<cotrec::Stage> stages;
    if (command == "all") {
      stages = cotrec::all_stages();
    } else {
      stages.push_back(cotrec::parse_stage(command));
    }
    for (cotrec::Stage s : stages) {
      cotrec::StageResult r = cotrec::run_stage(s, cfg, opts);
      if (!quiet) {
        std::cout << "[" << cotrec::to_string(s) << "] " << r.written.size() << " written, "
                  << r.unchanged.size() << " unchanged\n";
        if (s != cotrec::Stage::kReport) std::cout << r.summary;
      }
    }
  } catch (const cotrec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cotrec::exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
