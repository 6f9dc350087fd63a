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

#include "cotrec/errors.h"
#include "cotrec/synthetic.h"

int main(int argc, char** argv) {
  CLI::App app{"Write a planted block-structured dataset"};
  cotrec::PlantedConfig cfg;
  std::string dir;
  app.add_option("dir", dir, "output directory")->required();
  app.add_option("--users", cfg.users);
  app.add_option("--items", cfg.items);
  app.add_option("--blocks", cfg.blocks);
  app.add_option("--min-length", cfg.min_length);
  app.add_option("--max-length", cfg.max_length);
  app.add_option("--max-step", cfg.max_step);
  app.add_option("--jump", cfg.jump_probability);
  app.add_option("--harmonics", cfg.harmonics);
  app.add_option("--noise", cfg.semantic_noise);
  app.add_option("--bad-cot", cfg.bad_cot_fraction);
  app.add_option("--user-prefix", cfg.user_prefix);
  app.add_option("--item-prefix", cfg.item_prefix);
  app.add_option("--seed", cfg.seed);
  CLI11_PARSE(app, argc, argv);
  try {
    cotrec::write_planted_dataset(dir, cotrec::make_planted_dataset(cfg));
  } catch (const cotrec::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cotrec::exit_code_for(e.kind());
  }
  std::cout << "wrote " << cfg.users << " users x " << cfg.items << " items to " << dir << '\n';
  return 0;
}
