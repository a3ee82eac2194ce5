// Copyright 2026 The MaskAudit Authors. All Rights Reserved.
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

#ifndef MASKAUDIT_CORE_ERROR_H_
#define MASKAUDIT_CORE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace maskaudit {

// Every failure raised by the library carries one of these codes. The C API
// maps them one-to-one onto mka_status values.
enum class ErrorCode {
  kInvalidArgument = 1,
  kEmptyMask,
  kShapeMismatch,
  kInvalidImage,
  kSchemaError,
  kStratificationError,
  kMissingMask,
  kTrainingDiverged,
  kDegenerateLabels,
  kNumericalDegeneracy,
  kIncompleteRun,
  kUnsupportedBackbone,
  kModelOutputError,
  kInsufficientImages,
  kNotFound,
  kPhaseClosed,
  kIoError,
  kConfigError,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace maskaudit

#endif  // MASKAUDIT_CORE_ERROR_H_
