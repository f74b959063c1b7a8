// Copyright 2026 The faceir Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FACEIR_ERROR_HPP_
#define FACEIR_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace faceir {

// Mirrors fir_status in faceir.h; the numeric values are part of the C ABI.
enum class ErrorCode {
  kInvalidArgument = 1,
  kInsufficientData = 2,
  kDiverged = 3,
  kNotConverged = 4,
  kIo = 5,
  kInternal = 6,
};

const char* ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void ThrowInvalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidArgument, message);
}

inline void Require(bool condition, const std::string& message) {
  if (!condition) ThrowInvalid(message);
}

}  // namespace faceir

#endif  // FACEIR_ERROR_HPP_
