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

#ifndef MASKAUDIT_CORE_PNG_IO_H_
#define MASKAUDIT_CORE_PNG_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "core/image.h"

namespace maskaudit {

// 8-bit RGB raster, row-major interleaved. Used for figures and overlays.
struct RgbRaster {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> pixels;  // height * width * 3
};

// Gray and RGB PNGs load as 1- and 3-channel images scaled to [0, 1];
// alpha is dropped and 16-bit samples are rescaled.
Image ReadPngImage(const std::filesystem::path& path);
Image DecodePngImage(std::span<const uint8_t> bytes);

// Values are clamped to [0, 1] and quantized to 8 bits. Only 1- and
// 3-channel images are accepted. No ancillary chunks are written, so the
// output carries pixels only.
std::vector<uint8_t> EncodePngImage(const Image& image);
void WritePngImage(const std::filesystem::path& path, const Image& image);

// Masks are single-channel PNGs: 0 = background, 255 = foreground. On read
// any nonzero sample counts as foreground.
BinaryMask ReadPngMask(const std::filesystem::path& path);
void WritePngMask(const std::filesystem::path& path, const BinaryMask& mask);

std::vector<uint8_t> EncodePngRgb(const RgbRaster& raster);
void WritePngRgb(const std::filesystem::path& path, const RgbRaster& raster);

}  // namespace maskaudit

#endif  // MASKAUDIT_CORE_PNG_IO_H_
