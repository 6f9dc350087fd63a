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

#include <filesystem>

#include "cotrec/errors.h"
#include "cotrec/io.h"

using namespace cotrec;

TEST_CASE("format_double round-trips exactly") {
  for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, -1e-300, 0.4025}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.75) == "0.75");
  CHECK(parse_double("+2.5") == 2.5);
  CHECK(parse_double("1e-3") == 0.001);
  CHECK_THROWS_AS(parse_double("abc"), DataError);
  CHECK_THROWS_AS(parse_double("1.5x"), DataError);
}

TEST_CASE("field escaping round-trips tabs, newlines and backslashes") {
  const std::string raw = "a\tb\nc\\d\re";
  const std::string esc = escape_field(raw);
  CHECK(esc.find('\t') == std::string::npos);
  CHECK(esc.find('\n') == std::string::npos);
  CHECK(unescape_field(esc) == raw);
}

TEST_CASE("Digest is 64-bit FNV-1a") {
  // Published FNV-1a test vectors.
  CHECK(Digest().value() == 0xcbf29ce484222325ULL);
  CHECK(Digest().update("a").value() == 0xaf63dc4c8601ec8cULL);
  CHECK(Digest().update("foobar").value() == 0x85944171f73967e8ULL);
}

TEST_CASE("checkpoint serialization is byte-stable") {
  Checkpoint c;
  c.kind = "demo";
  c.set_meta("name", "tab\there");
  Eigen::MatrixXd m(2, 3);
  m << 1, 2.5, -3, 1e-17, 0.1, 1.0 / 7.0;
  c.add_tensor("w", m);
  const std::string text = serialize_checkpoint(c);
  const Checkpoint back = parse_checkpoint(text);
  CHECK(back.kind == "demo");
  CHECK(back.meta_value("name") == "tab\there");
  CHECK(back.tensor("w") == m);
  CHECK(serialize_checkpoint(back) == text);
  CHECK_THROWS_AS(back.tensor("missing"), DataError);
  CHECK_THROWS_AS(parse_checkpoint("garbage"), DataError);
}

TEST_CASE("atomic write creates parents and replaces content") {
  const auto dir = std::filesystem::temp_directory_path() / "cotrec_io_test";
  std::filesystem::remove_all(dir);
  const auto path = dir / "sub" / "f.txt";
  write_file_atomic(path, "one");
  CHECK(read_file(path) == "one");
  write_file_atomic(path, "two");
  CHECK(read_file(path) == "two");
  std::size_t files = 0;
  for (auto& e : std::filesystem::directory_iterator(path.parent_path())) {
    (void)e;
    ++files;
  }
  CHECK(files == 1);
  std::filesystem::remove_all(dir);
  CHECK_THROWS_AS(read_file(path), DataError);
}

TEST_CASE("exit codes differ per error class") {
  CHECK(exit_code_for(ErrorKind::kConfig) == 2);
  CHECK(exit_code_for(ErrorKind::kData) == 3);
  CHECK(exit_code_for(ErrorKind::kTraining) == 4);
  CHECK(exit_code_for(ErrorKind::kDependency) == 5);
}
