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

#ifndef CUATRACE_ERROR_HPP
#define CUATRACE_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace cuatrace {

enum class ErrorKind {
  kInvalidInput,
  kIngestion,
  kSchema,
  kValidation,
  kState,
  kTransport,
  kIo,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kIngestion: return "ingestion";
    case ErrorKind::kSchema: return "schema";
    case ErrorKind::kValidation: return "validation";
    case ErrorKind::kState: return "state";
    case ErrorKind::kTransport: return "transport";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

/// Single exception type for the library. `payload()` holds the offending raw
/// input where one exists (service replies, manifest lines).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string payload = {})
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        message_(message),
        payload_(std::move(payload)) {}

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& message() const noexcept { return message_; }
  const std::string& payload() const noexcept { return payload_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::string payload_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              std::string payload = {}) {
  throw Error(kind, message, std::move(payload));
}

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorKind::kInvalidInput, message);
}

}  // namespace cuatrace

#endif  // CUATRACE_ERROR_HPP
