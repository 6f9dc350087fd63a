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

// Eigen must precede httplib: resolver headers pull in macros that clash with it.
#include "cotrec/cot.h"

#include <httplib.h>
#include <json.hpp>

namespace cotrec {

std::string RemoteAdapter::complete(const std::string& /*user*/, const std::string& /*item*/,
                                    const InstructionInstance* /*instance*/,
                                    const std::string& prompt) {
  ++calls_;
  httplib::Client client(endpoint_.host, endpoint_.port);
  client.set_connection_timeout(endpoint_.timeout_seconds, 0);
  client.set_read_timeout(endpoint_.timeout_seconds, 0);
  const std::string body = nlohmann::json{{"prompt", prompt}}.dump();
  std::string last_error = "no attempt made";
  int attempt = 0;
  for (attempt = 1; attempt <= endpoint_.max_attempts; ++attempt) {
    auto res = client.Post(endpoint_.path, body, "application/json");
    if (!res) {
      last_error = "request to " + endpoint_.host + ":" + std::to_string(endpoint_.port) +
                   " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "endpoint returned HTTP " + std::to_string(res->status);
      continue;
    }
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("text") || !reply["text"].is_string()) {
      last_error = "endpoint reply lacks a string \"text\" field";
      continue;
    }
    return reply["text"].get<std::string>();
  }
  throw TransportError(last_error, endpoint_.max_attempts);
}

}  // namespace cotrec
