// Copyright 2026 The cuatrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CUATRACE_NEGSYNTH_HTTP_HPP
#define CUATRACE_NEGSYNTH_HTTP_HPP

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>

#include <httplib.h>

#include "cuatrace/error.hpp"
#include "cuatrace/negsynth.hpp"

namespace cuatrace {

/// POSTs JSON request bodies to an HTTP endpoint such as
/// "http://host:8080/v1/translate". Connection failures and non-200 replies
/// are transport errors.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(const std::string& endpoint, std::optional<std::string> bearer_token = {},
                         std::chrono::seconds timeout = std::chrono::seconds(60))
      : token_(std::move(bearer_token)), timeout_(timeout) {
    const auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
      fail(ErrorKind::kInvalidInput, "endpoint must look like http://host[:port]/path");
    const auto path_begin = endpoint.find('/', scheme_end + 3);
    base_ = endpoint.substr(0, path_begin);
    path_ = path_begin == std::string::npos ? "/" : endpoint.substr(path_begin);
  }

  /// Endpoint and token from CUATRACE_SERVICE_URL / CUATRACE_SERVICE_TOKEN
  /// when set, otherwise `endpoint`.
  static HttpTransport from_environment(const std::string& endpoint) {
    const char* url = std::getenv("CUATRACE_SERVICE_URL");
    const char* token = std::getenv("CUATRACE_SERVICE_TOKEN");
    return HttpTransport(url && *url ? url : endpoint,
                         token && *token ? std::optional<std::string>(token) : std::nullopt);
  }

  std::string exchange(const std::string& request_body) override {
    httplib::Client client(base_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    httplib::Headers headers;
    if (token_) headers.emplace("Authorization", "Bearer " + *token_);
    auto res = client.Post(path_, headers, request_body, "application/json");
    if (!res) fail(ErrorKind::kTransport, "POST " + base_ + path_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200)
      fail(ErrorKind::kTransport, "POST " + base_ + path_ + ": HTTP " + std::to_string(res->status),
           res->body);
    return res->body;
  }

  const std::string& base() const { return base_; }
  const std::string& path() const { return path_; }

 private:
  std::string base_;
  std::string path_;
  std::optional<std::string> token_;
  std::chrono::seconds timeout_;
};

}  // namespace cuatrace

#endif  // CUATRACE_NEGSYNTH_HTTP_HPP
