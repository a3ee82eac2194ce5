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

#include "core/image.h"

#include <algorithm>
#include <string>

#include "core/error.h"

namespace maskaudit {

BinaryMask::BinaryMask(int height, int width, std::vector<uint8_t> pixels)
    : height_(height), width_(width), pixels_(std::move(pixels)) {
  if (height < 0 || width < 0 ||
      pixels_.size() != static_cast<size_t>(height) * width) {
    Fail(ErrorCode::kShapeMismatch,
         "mask buffer holds " + std::to_string(pixels_.size()) +
             " pixels, expected " + std::to_string(height) + "x" +
             std::to_string(width));
  }
  for (auto& p : pixels_) p = p != 0 ? 1 : 0;
}

BinaryMask BinaryMask::Empty(int height, int width) {
  return BinaryMask(height, width,
                    std::vector<uint8_t>(static_cast<size_t>(height) * width, 0));
}

BinaryMask BinaryMask::Full(int height, int width) {
  return BinaryMask(height, width,
                    std::vector<uint8_t>(static_cast<size_t>(height) * width, 1));
}

size_t BinaryMask::ForegroundCount() const {
  return static_cast<size_t>(std::count(pixels_.begin(), pixels_.end(), 1));
}

}  // namespace maskaudit
