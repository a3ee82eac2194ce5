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

#include "core/png_io.h"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "core/error.h"
#include "core/file_util.h"

namespace maskaudit {
namespace {

struct ReadCursor {
  std::span<const uint8_t> bytes;
  size_t offset = 0;
};

void ReadFromCursor(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes.size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->bytes.data() + cursor->offset, length);
  cursor->offset += length;
}

void WriteToVector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void FlushNothing(png_structp) {}

void ErrorHandler(png_structp png, png_const_charp message) {
  auto* text = static_cast<std::string*>(png_get_error_ptr(png));
  if (text != nullptr) *text = message;
  png_longjmp(png, 1);
}

void WarningHandler(png_structp, png_const_charp) {}

// Decoded 8-bit samples with 1 (gray) or 3 (RGB) channels.
struct Decoded {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<uint8_t> samples;  // interleaved
};

Decoded Decode(std::span<const uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    Fail(ErrorCode::kInvalidImage, "not a PNG stream");
  }
  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error,
                                           ErrorHandler, WarningHandler);
  png_infop info = png_create_info_struct(png);
  Decoded result;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kInvalidImage, "PNG decode failed: " + error);
  }
  ReadCursor cursor{bytes, 0};
  png_set_read_fn(png, &cursor, ReadFromCursor);
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY &&
      png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  result.width = static_cast<int>(png_get_image_width(png, info));
  result.height = static_cast<int>(png_get_image_height(png, info));
  const int out_channels = png_get_channels(png, info);
  const size_t row_bytes = png_get_rowbytes(png, info);
  std::vector<uint8_t> raw(row_bytes * result.height);
  rows.resize(result.height);
  for (int r = 0; r < result.height; ++r) rows[r] = raw.data() + r * row_bytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  // Alpha might survive tRNS expansion; keep only color samples.
  const int color_channels = (out_channels >= 3) ? 3 : 1;
  result.channels = color_channels;
  result.samples.resize(static_cast<size_t>(result.height) * result.width *
                        color_channels);
  for (int r = 0; r < result.height; ++r) {
    for (int c = 0; c < result.width; ++c) {
      for (int k = 0; k < color_channels; ++k) {
        result.samples[(static_cast<size_t>(r) * result.width + c) *
                           color_channels + k] =
            raw[r * row_bytes + static_cast<size_t>(c) * out_channels + k];
      }
    }
  }
  return result;
}

std::vector<uint8_t> Encode(int height, int width, int channels,
                            const std::vector<uint8_t>& samples) {
  if (height <= 0 || width <= 0) {
    Fail(ErrorCode::kInvalidImage, "cannot encode an empty raster");
  }
  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error,
                                            ErrorHandler, WarningHandler);
  png_infop info = png_create_info_struct(png);
  std::vector<uint8_t> out;
  std::vector<png_bytep> rows(height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIoError, "PNG encode failed: " + error);
  }
  png_set_write_fn(png, &out, WriteToVector, FlushNothing);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const size_t stride = static_cast<size_t>(width) * channels;
  for (int r = 0; r < height; ++r) {
    rows[r] = const_cast<png_bytep>(samples.data() + r * stride);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

uint8_t Quantize(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<uint8_t>(std::lround(clamped * 255.0f));
}

}  // namespace

Image DecodePngImage(std::span<const uint8_t> bytes) {
  const Decoded decoded = Decode(bytes);
  Image image(decoded.channels, decoded.height, decoded.width);
  for (int r = 0; r < decoded.height; ++r) {
    for (int c = 0; c < decoded.width; ++c) {
      for (int k = 0; k < decoded.channels; ++k) {
        image.at(k, r, c) =
            decoded.samples[(static_cast<size_t>(r) * decoded.width + c) *
                                decoded.channels + k] / 255.0f;
      }
    }
  }
  return image;
}

Image ReadPngImage(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  return DecodePngImage(bytes);
}

std::vector<uint8_t> EncodePngImage(const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    Fail(ErrorCode::kInvalidImage, "PNG export supports 1 or 3 channels, got " +
                                       std::to_string(image.channels));
  }
  std::vector<uint8_t> samples(image.data.size());
  for (int r = 0; r < image.height; ++r) {
    for (int c = 0; c < image.width; ++c) {
      for (int k = 0; k < image.channels; ++k) {
        samples[(static_cast<size_t>(r) * image.width + c) * image.channels +
                k] = Quantize(image.at(k, r, c));
      }
    }
  }
  return Encode(image.height, image.width, image.channels, samples);
}

void WritePngImage(const std::filesystem::path& path, const Image& image) {
  WriteFileBytes(path, EncodePngImage(image));
}

BinaryMask ReadPngMask(const std::filesystem::path& path) {
  const Decoded decoded = Decode(ReadFileBytes(path));
  std::vector<uint8_t> pixels(static_cast<size_t>(decoded.height) *
                              decoded.width);
  for (size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = decoded.samples[i * decoded.channels] != 0 ? 1 : 0;
  }
  return BinaryMask(decoded.height, decoded.width, std::move(pixels));
}

void WritePngMask(const std::filesystem::path& path, const BinaryMask& mask) {
  std::vector<uint8_t> samples(mask.pixels().size());
  std::transform(mask.pixels().begin(), mask.pixels().end(), samples.begin(),
                 [](uint8_t p) -> uint8_t { return p ? 255 : 0; });
  WriteFileBytes(path, Encode(mask.height(), mask.width(), 1, samples));
}

std::vector<uint8_t> EncodePngRgb(const RgbRaster& raster) {
  return Encode(raster.height, raster.width, 3, raster.pixels);
}

void WritePngRgb(const std::filesystem::path& path, const RgbRaster& raster) {
  WriteFileBytes(path, EncodePngRgb(raster));
}

}  // namespace maskaudit
