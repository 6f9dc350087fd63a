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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cotrec {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

/// Backslash escaping for tab-separated text fields (\t, \n, \r, \\).
std::string escape_field(std::string_view text);
std::string unescape_field(std::string_view text);

/// 64-bit FNV-1a, used for parameter and config digests.
class Digest {
 public:
  Digest& update(const void* data, std::size_t size);
  Digest& update(std::string_view text) { return update(text.data(), text.size()); }
  Digest& update(const Eigen::MatrixXd& m);
  std::uint64_t value() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Structured-text checkpoint: ordered metadata plus named tensors written
/// row-major under an explicit `tensor <name> <rows> <cols>` header.
struct Checkpoint {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, Eigen::MatrixXd>> tensors;

  void set_meta(const std::string& key, const std::string& value);
  const std::string& meta_value(const std::string& key) const;
  bool has_meta(const std::string& key) const;
  const Eigen::MatrixXd& tensor(const std::string& name) const;
  void add_tensor(const std::string& name, const Eigen::MatrixXd& value);
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view text);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace cotrec
