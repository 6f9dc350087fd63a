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

#include <sys/wait.h>
#include <unistd.h>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cotrec/config.h"
#include "cotrec/errors.h"
#include "cotrec/io.h"
#include "cotrec/pipeline.h"
#include "cotrec/synthetic.h"

namespace fs = std::filesystem;
using namespace cotrec;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() /
             ("cotrec-" + tag + "-" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path small_dataset(const fs::path& dir) {
  PlantedConfig pc;
  pc.users = 40;
  pc.items = 30;
  pc.harmonics = 4;
  write_planted_dataset(dir / "data", make_planted_dataset(pc));
  return dir / "data";
}

constexpr const char* kBase = R"(# small run
paths.interactions = interactions.tsv
paths.catalog = catalog.tsv
paths.embeddings = embeddings.tsv
paths.cot_fixtures = cot_fixtures.tsv
seed = 3
cf.epochs = 1
)";

RunConfig small_config(const fs::path& data, const fs::path& out) {
  RunConfig cfg = parse_run_config(kBase, data);
  cfg.paths.out = out;
  return cfg;
}

}  // namespace

TEST_CASE("config files parse dotted keys and resolve relative paths") {
  const RunConfig cfg = parse_run_config(
      "seed = 9\ncot.threshold = 0.7\neval.ks = 1,10\npaths.catalog = c.tsv\n"
      "align.optimizer = adam\ncot.weights = 0.4,0.2,0.2,0.2\n",
      "/data");
  CHECK(cfg.seed == 9);
  CHECK(cfg.cot_threshold == doctest::Approx(0.7));
  CHECK(cfg.ks == std::vector<int>{1, 10});
  CHECK(cfg.paths.catalog == fs::path("/data/c.tsv"));
  CHECK(cfg.align.optimizer == OptimizerKind::kAdam);
  CHECK(cfg.cot_weights[0] == doctest::Approx(0.4));
}

TEST_CASE("unknown keys and malformed lines are rejected") {
  CHECK_THROWS_AS(parse_run_config("cot.treshold = 0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("just words\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("seed = many\n"), ConfigError);
  try {
    parse_run_config("cot.treshold = 0.5\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("cot.treshold") != std::string::npos);
  }
}

TEST_CASE("validation names the offending field") {
  TempDir tmp("cfg");
  const fs::path data = small_dataset(tmp.path);
  auto message_for = [&](const std::string& extra) {
    RunConfig cfg = parse_run_config(std::string(kBase) + extra, data);
    cfg.paths.out = tmp.path / "out";
    try {
      cfg.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message_for("").empty());
  CHECK(message_for("cot.threshold = 1.5\n").rfind("cot.threshold:", 0) == 0);
  CHECK(message_for("data.cold_fraction = 0.6\n").rfind("data.cold_fraction:", 0) == 0);
  CHECK(message_for("align.lr = -1e-3\n").rfind("align.lr:", 0) == 0);
  CHECK(message_for("eval.pool_size = 5\n").rfind("eval.pool_size:", 0) == 0);
  CHECK(message_for("paths.references = nowhere.tsv\n").rfind("paths.references:", 0) == 0);
  CHECK(message_for("cot.weights = 0.5,0.5,0.5,0.5\n").rfind("cot.weights:", 0) == 0);
}

TEST_CASE("config digest ignores the output directory but tracks inputs") {
  TempDir tmp("digest");
  const fs::path data = small_dataset(tmp.path);
  RunConfig a = small_config(data, tmp.path / "a");
  RunConfig b = small_config(data, tmp.path / "b");
  CHECK(a.digest() == b.digest());
  b.seed = 4;
  CHECK(a.digest() != b.digest());
  const std::string before = a.digest();
  std::ofstream(data / "catalog.tsv", std::ios::app) << "extra\tx\ty\n";
  CHECK(a.digest() != before);
}

TEST_CASE("serialize round-trips through the parser") {
  RunConfig cfg;
  cfg.seed = 77;
  cfg.cot_threshold = 0.45;
  cfg.ks = {3, 7};
  const RunConfig back = parse_run_config(cfg.serialize());
  CHECK(back.serialize() == cfg.serialize());
}

TEST_CASE("stages refuse to run without their inputs") {
  TempDir tmp("deps");
  const RunConfig cfg = small_config(small_dataset(tmp.path), tmp.path / "out");
  CHECK_THROWS_AS(run_stage(Stage::kTrainCf, cfg), DependencyError);
  CHECK_THROWS_AS(run_stage(Stage::kEval, cfg), DependencyError);
  try {
    run_stage(Stage::kTrainAlign, cfg);
  } catch (const DependencyError& e) {
    CHECK(std::string(e.what()).find("prepare") != std::string::npos);
  }
}

TEST_CASE("prepare writes its artifacts and a rerun leaves them unchanged") {
  TempDir tmp("prepare");
  const RunConfig cfg = small_config(small_dataset(tmp.path), tmp.path / "out");
  const StageResult first = run_stage(Stage::kPrepare, cfg);
  CHECK(first.written.size() >= 4);
  CHECK(first.unchanged.empty());
  for (const char* name : {artifact::kItems, artifact::kSequences, artifact::kSplit,
                           artifact::kPrepareReport}) {
    const std::string text = read_file(cfg.paths.out / name);
    CHECK(text.find("# config " + cfg.digest()) != std::string::npos);
  }
  CHECK_FALSE(fs::exists(cfg.paths.out / artifact::kLock));

  const StageResult second = run_stage(Stage::kPrepare, cfg);
  CHECK(second.written.empty());
  CHECK(second.unchanged.size() == first.written.size());

  const PreparedData data = load_prepared(cfg);
  CHECK(data.split.users.size() == 40);
  CHECK(data.partition.cold.size() == data.partition.warm.size());
}

TEST_CASE("changed settings do not overwrite artifacts without force") {
  TempDir tmp("force");
  RunConfig cfg = small_config(small_dataset(tmp.path), tmp.path / "out");
  run_stage(Stage::kPrepare, cfg);
  cfg.cold_fraction = 0.2;
  CHECK_THROWS_AS(run_stage(Stage::kPrepare, cfg), ConfigError);
  RunOptions force;
  force.force = true;
  const StageResult replaced = run_stage(Stage::kPrepare, cfg, force);
  CHECK_FALSE(replaced.written.empty());
}

TEST_CASE("a live lock blocks the output directory and a stale one is reclaimed") {
  TempDir tmp("lock");
  const RunConfig cfg = small_config(small_dataset(tmp.path), tmp.path / "out");
  fs::create_directories(cfg.paths.out);
  const fs::path lock = cfg.paths.out / artifact::kLock;
  write_file_atomic(lock, std::to_string(::getpid()) + "\n");
  CHECK_THROWS_AS(run_stage(Stage::kPrepare, cfg), DependencyError);

  // Fork a child that exits at once; its pid then names no live process.
  const pid_t child = ::fork();
  if (child == 0) ::_exit(0);
  int status = 0;
  ::waitpid(child, &status, 0);
  write_file_atomic(lock, std::to_string(child) + "\n");
  CHECK_NOTHROW(run_stage(Stage::kPrepare, cfg));
  CHECK_FALSE(fs::exists(lock));
}

TEST_CASE("stage names round-trip") {
  for (Stage s : all_stages()) CHECK(parse_stage(to_string(s)) == s);
  CHECK(all_stages().size() == 8);
  CHECK_THROWS_AS(parse_stage("train"), ConfigError);
}
