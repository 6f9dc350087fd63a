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

#include "cotrec/io.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include "cotrec/errors.h"

namespace cotrec {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw ContractError("format_double failed");
  return std::string(buf, end);
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw DataError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view text) {
  const char* ws = " \t\r\n";
  std::size_t b = text.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  std::size_t e = text.find_last_not_of(ws);
  return text.substr(b, e - b + 1);
}

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\\' && i + 1 < text.size()) {
      char n = text[++i];
      switch (n) {
        case 't': out += '\t'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        case '\\': out += '\\'; break;
        default: out += '\\'; out += n;
      }
    } else {
      out += c;
    }
  }
  return out;
}

Digest& Digest::update(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= bytes[i];
    state_ *= 0x100000001b3ULL;
  }
  return *this;
}

Digest& Digest::update(const Eigen::MatrixXd& m) {
  const std::int64_t shape[2] = {m.rows(), m.cols()};
  update(shape, sizeof(shape));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      update(&v, sizeof(v));
    }
  }
  return *this;
}

std::string Digest::hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state_));
  return buf;
}

void Checkpoint::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta.emplace_back(key, value);
}

bool Checkpoint::has_meta(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return true;
  }
  return false;
}

const std::string& Checkpoint::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  throw DataError("checkpoint '" + kind + "' has no meta key '" + key + "'");
}

const Eigen::MatrixXd& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, t] : tensors) {
    if (n == name) return t;
  }
  throw DataError("checkpoint '" + kind + "' has no tensor '" + name + "'");
}

void Checkpoint::add_tensor(const std::string& name, const Eigen::MatrixXd& value) {
  tensors.emplace_back(name, value);
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out = "cotrec-checkpoint 1\n";
  out += "kind " + ckpt.kind + "\n";
  for (const auto& [k, v] : ckpt.meta) {
    out += "meta " + k + "\t" + escape_field(v) + "\n";
  }
  for (const auto& [name, t] : ckpt.tensors) {
    out += "tensor " + name + " " + std::to_string(t.rows()) + " " +
           std::to_string(t.cols()) + "\n";
    for (Eigen::Index r = 0; r < t.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.cols(); ++c) {
        if (c) out += ' ';
        out += format_double(t(r, c));
      }
      out += '\n';
    }
  }
  out += "end\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view text) {
  Checkpoint ckpt;
  auto lines = split(text, '\n');
  std::size_t i = 0;
  auto next = [&]() -> std::string_view {
    if (i >= lines.size()) throw ParseError(i, "unexpected end of checkpoint");
    return lines[i++];
  };
  if (next() != "cotrec-checkpoint 1") throw ParseError(1, "bad checkpoint header");
  std::string_view kind = next();
  if (kind.substr(0, 5) != "kind ") throw ParseError(i, "expected 'kind'");
  ckpt.kind = std::string(kind.substr(5));
  while (true) {
    std::string_view line = next();
    if (line == "end") break;
    if (line.substr(0, 5) == "meta ") {
      auto body = line.substr(5);
      auto tab = body.find('\t');
      if (tab == std::string_view::npos) throw ParseError(i, "meta without value");
      ckpt.meta.emplace_back(std::string(body.substr(0, tab)),
                             unescape_field(body.substr(tab + 1)));
    } else if (line.substr(0, 7) == "tensor ") {
      auto parts = split(line.substr(7), ' ');
      if (parts.size() != 3) throw ParseError(i, "bad tensor header");
      const long rows = std::stol(std::string(parts[1]));
      const long cols = std::stol(std::string(parts[2]));
      Eigen::MatrixXd t(rows, cols);
      for (long r = 0; r < rows; ++r) {
        auto values = split(next(), ' ');
        if (cols == 0) continue;
        if (static_cast<long>(values.size()) != cols) {
          throw ParseError(i, "tensor row has wrong width");
        }
        for (long c = 0; c < cols; ++c) t(r, c) = parse_double(values[c]);
      }
      ckpt.tensors.emplace_back(std::string(parts[0]), std::move(t));
    } else {
      throw ParseError(i, "unrecognized checkpoint line");
    }
  }
  return ckpt;
}

void write_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const fs::path& path) {
  return parse_checkpoint(read_file(path));
}

}  // namespace cotrec
