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

#include "core/error.h"

namespace maskaudit {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kInvalidImage: return "InvalidImage";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kStratificationError: return "StratificationError";
    case ErrorCode::kMissingMask: return "MissingMask";
    case ErrorCode::kTrainingDiverged: return "TrainingDiverged";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kNumericalDegeneracy: return "NumericalDegeneracy";
    case ErrorCode::kIncompleteRun: return "IncompleteRun";
    case ErrorCode::kUnsupportedBackbone: return "UnsupportedBackbone";
    case ErrorCode::kModelOutputError: return "ModelOutputError";
    case ErrorCode::kInsufficientImages: return "InsufficientImages";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kPhaseClosed: return "PhaseClosed";
    case ErrorCode::kIoError: return "IOError";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace maskaudit
