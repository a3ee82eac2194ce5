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

#ifndef MASKAUDIT_CORE_IMAGE_H_
#define MASKAUDIT_CORE_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace maskaudit {

// Planar (channel-major) float image. Raw intensities live in [0, 1];
// normalized images may hold any finite value.
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        data(static_cast<size_t>(c) * h * w, fill) {}

  size_t plane_size() const { return static_cast<size_t>(height) * width; }
  bool empty() const { return channels == 0 || height == 0 || width == 0; }

  float& at(int c, int row, int col) {
    return data[c * plane_size() + static_cast<size_t>(row) * width + col];
  }
  float at(int c, int row, int col) const {
    return data[c * plane_size() + static_cast<size_t>(row) * width + col];
  }

  std::span<float> plane(int c) {
    return {data.data() + c * plane_size(), plane_size()};
  }
  std::span<const float> plane(int c) const {
    return {data.data() + c * plane_size(), plane_size()};
  }

  bool operator==(const Image&) const = default;
};

// Binary region-of-interest mask; foreground marks the ROI. Instances are
// never mutated after construction: every operation returns a new mask.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width, std::vector<uint8_t> pixels);
  static BinaryMask Empty(int height, int width);
  static BinaryMask Full(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return height_ == 0 || width_ == 0; }

  bool at(int row, int col) const {
    return pixels_[static_cast<size_t>(row) * width_ + col] != 0;
  }
  std::span<const uint8_t> pixels() const { return pixels_; }
  size_t ForegroundCount() const;

  bool operator==(const BinaryMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<uint8_t> pixels_;  // 0 or 1, row-major
};

}  // namespace maskaudit

#endif  // MASKAUDIT_CORE_IMAGE_H_
