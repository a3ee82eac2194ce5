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

#include "masking/mask_ops.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "core/error.h"

namespace maskaudit {

std::string_view StrategyName(MaskingStrategy strategy) {
  switch (strategy) {
    case MaskingStrategy::kFull: return "FULL";
    case MaskingStrategy::kNoRoi: return "NO_ROI";
    case MaskingStrategy::kNoRoiBb: return "NO_ROI_BB";
    case MaskingStrategy::kOnlyRoi: return "ONLY_ROI";
    case MaskingStrategy::kOnlyRoiBb: return "ONLY_ROI_BB";
  }
  return "UNKNOWN";
}

std::string_view StrategyLabel(MaskingStrategy strategy) {
  switch (strategy) {
    case MaskingStrategy::kFull: return "Full";
    case MaskingStrategy::kNoRoi: return "No ROI";
    case MaskingStrategy::kNoRoiBb: return "No ROI BB";
    case MaskingStrategy::kOnlyRoi: return "Only ROI";
    case MaskingStrategy::kOnlyRoiBb: return "Only ROI BB";
  }
  return "?";
}

MaskingStrategy ParseStrategy(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  for (MaskingStrategy s : kAllStrategies) {
    if (StrategyName(s) == upper) return s;
  }
  Fail(ErrorCode::kInvalidArgument,
       "unknown masking strategy '" + std::string(text) +
           "' (expected FULL, NO_ROI, NO_ROI_BB, ONLY_ROI or ONLY_ROI_BB)");
}

BoundingBox ComputeBoundingBox(const BinaryMask& mask) {
  BoundingBox box{mask.height(), mask.width(), -1, -1};
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      box.row_min = std::min(box.row_min, r);
      box.col_min = std::min(box.col_min, c);
      box.row_max = std::max(box.row_max, r);
      box.col_max = std::max(box.col_max, c);
    }
  }
  if (box.row_max < 0) {
    Fail(ErrorCode::kEmptyMask, "bounding box of a mask with no foreground");
  }
  return box;
}

BinaryMask BoxMask(int height, int width, const BoundingBox& box) {
  std::vector<uint8_t> pixels(static_cast<size_t>(height) * width, 0);
  for (int r = std::max(0, box.row_min); r <= std::min(height - 1, box.row_max);
       ++r) {
    for (int c = std::max(0, box.col_min);
         c <= std::min(width - 1, box.col_max); ++c) {
      pixels[static_cast<size_t>(r) * width + c] = 1;
    }
  }
  return BinaryMask(height, width, std::move(pixels));
}

namespace {

// Sentinel for "no foreground reachable"; far above any squared distance on
// a realistic grid yet exact in double arithmetic.
constexpr double kFar = 1e12;

// One-dimensional lower envelope of parabolas (Felzenszwalb & Huttenlocher).
void DistanceTransform1d(const double* f, int n, double* d, int* v, double* z) {
  int k = 0;
  v[0] = 0;
  z[0] = -INFINITY;
  z[1] = INFINITY;
  for (int q = 1; q < n; ++q) {
    double s = 0.0;
    // z[0] is -inf, so k never drops below zero.
    while (true) {
      const int p = v[k];
      s = ((f[q] + static_cast<double>(q) * q) -
           (f[p] + static_cast<double>(p) * p)) /
          (2.0 * q - 2.0 * p);
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = INFINITY;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<long long> SquaredDistanceTransform(const BinaryMask& mask) {
  const int h = mask.height();
  const int w = mask.width();
  const int n = std::max(h, w);
  std::vector<double> grid(static_cast<size_t>(h) * w);
  for (size_t i = 0; i < grid.size(); ++i) {
    grid[i] = mask.pixels()[i] ? 0.0 : kFar;
  }
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);
  // Columns first, then rows.
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) f[r] = grid[static_cast<size_t>(r) * w + c];
    DistanceTransform1d(f.data(), h, d.data(), v.data(), z.data());
    for (int r = 0; r < h; ++r) grid[static_cast<size_t>(r) * w + c] = d[r];
  }
  for (int r = 0; r < h; ++r) {
    double* row = grid.data() + static_cast<size_t>(r) * w;
    std::copy(row, row + w, f.begin());
    DistanceTransform1d(f.data(), w, d.data(), v.data(), z.data());
    std::copy(d.begin(), d.begin() + w, row);
  }
  std::vector<long long> out(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    out[i] = grid[i] >= kFar ? static_cast<long long>(kFar)
                             : std::llround(grid[i]);
  }
  return out;
}

BinaryMask Dilate(const BinaryMask& mask, int factor) {
  if (factor < 0) {
    Fail(ErrorCode::kInvalidArgument,
         "dilation factor must be non-negative, got " + std::to_string(factor));
  }
  if (factor == 0 || mask.empty()) return mask;
  const std::vector<long long> dist = SquaredDistanceTransform(mask);
  const long long limit = static_cast<long long>(factor) * factor;
  std::vector<uint8_t> pixels(dist.size());
  for (size_t i = 0; i < dist.size(); ++i) pixels[i] = dist[i] <= limit;
  return BinaryMask(mask.height(), mask.width(), std::move(pixels));
}

Image ApplyMasking(const Image& image, const BinaryMask* mask,
                   MaskingStrategy strategy, float fill) {
  if (strategy == MaskingStrategy::kFull) return image;
  if (mask == nullptr) {
    Fail(ErrorCode::kMissingMask, std::string(StrategyName(strategy)) +
                                      " masking requires an ROI mask");
  }
  if (mask->height() != image.height || mask->width() != image.width) {
    Fail(ErrorCode::kShapeMismatch,
         "mask is " + std::to_string(mask->height()) + "x" +
             std::to_string(mask->width()) + " but image is " +
             std::to_string(image.height) + "x" + std::to_string(image.width));
  }
  const bool use_box = strategy == MaskingStrategy::kNoRoiBb ||
                       strategy == MaskingStrategy::kOnlyRoiBb;
  const bool keep_roi = strategy == MaskingStrategy::kOnlyRoi ||
                        strategy == MaskingStrategy::kOnlyRoiBb;
  BinaryMask box_region;
  const BinaryMask* region = mask;
  if (use_box) {
    box_region = mask->ForegroundCount() == 0
                     ? BinaryMask::Empty(mask->height(), mask->width())
                     : BoxMask(mask->height(), mask->width(),
                               ComputeBoundingBox(*mask));
    region = &box_region;
  }
  Image out = image;
  const auto pixels = region->pixels();
  for (int c = 0; c < out.channels; ++c) {
    auto plane = out.plane(c);
    for (size_t i = 0; i < plane.size(); ++i) {
      const bool inside = pixels[i] != 0;
      if (inside != keep_roi) plane[i] = fill;
    }
  }
  return out;
}

ResizePlan PlanLetterbox(int height, int width, int target_size) {
  if (height <= 0 || width <= 0) {
    Fail(ErrorCode::kInvalidImage, "cannot preprocess a " +
                                       std::to_string(height) + "x" +
                                       std::to_string(width) + " image");
  }
  if (target_size <= 0) {
    Fail(ErrorCode::kInvalidArgument, "target size must be positive");
  }
  ResizePlan plan;
  plan.source_height = height;
  plan.source_width = width;
  plan.target_size = target_size;
  const int longest = std::max(height, width);
  // Short side is truncated; the long side lands exactly on target_size.
  auto scaled = [&](int side) {
    if (side == longest) return target_size;
    const long long num = static_cast<long long>(side) * target_size;
    return std::max(1, static_cast<int>(num / longest));
  };
  plan.content_height = scaled(height);
  plan.content_width = scaled(width);
  plan.pad_top = (target_size - plan.content_height) / 2;
  plan.pad_left = (target_size - plan.content_width) / 2;
  return plan;
}

namespace {

void CheckPlan(int h, int w, const ResizePlan& plan) {
  if (h != plan.source_height || w != plan.source_width) {
    Fail(ErrorCode::kShapeMismatch, "resize plan was built for " +
                                        std::to_string(plan.source_height) +
                                        "x" + std::to_string(plan.source_width) +
                                        ", got " + std::to_string(h) + "x" +
                                        std::to_string(w));
  }
}

}  // namespace

Image ResizeImage(const Image& image, const ResizePlan& plan) {
  if (image.empty()) Fail(ErrorCode::kInvalidImage, "empty image");
  CheckPlan(image.height, image.width, plan);
  if (plan.content_height == image.height && plan.content_width == image.width &&
      plan.target_size == image.height && plan.target_size == image.width) {
    return image;
  }
  Image out(image.channels, plan.target_size, plan.target_size, 0.0f);
  const double sy = static_cast<double>(image.height) / plan.content_height;
  const double sx = static_cast<double>(image.width) / plan.content_width;
  for (int r = 0; r < plan.content_height; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(image.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height - 1);
    const double wy = fy - y0;
    for (int c = 0; c < plan.content_width; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(image.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width - 1);
      const double wx = fx - x0;
      for (int k = 0; k < image.channels; ++k) {
        const double top =
            image.at(k, y0, x0) * (1 - wx) + image.at(k, y0, x1) * wx;
        const double bottom =
            image.at(k, y1, x0) * (1 - wx) + image.at(k, y1, x1) * wx;
        out.at(k, r + plan.pad_top, c + plan.pad_left) =
            static_cast<float>(top * (1 - wy) + bottom * wy);
      }
    }
  }
  return out;
}

BinaryMask ResizeMask(const BinaryMask& mask, const ResizePlan& plan) {
  CheckPlan(mask.height(), mask.width(), plan);
  const int t = plan.target_size;
  std::vector<uint8_t> pixels(static_cast<size_t>(t) * t, 0);
  const double sy = static_cast<double>(mask.height()) / plan.content_height;
  const double sx = static_cast<double>(mask.width()) / plan.content_width;
  for (int r = 0; r < plan.content_height; ++r) {
    const int y = std::min(static_cast<int>((r + 0.5) * sy), mask.height() - 1);
    for (int c = 0; c < plan.content_width; ++c) {
      const int x = std::min(static_cast<int>((c + 0.5) * sx), mask.width() - 1);
      pixels[static_cast<size_t>(r + plan.pad_top) * t + c + plan.pad_left] =
          mask.at(y, x);
    }
  }
  return BinaryMask(t, t, std::move(pixels));
}

Normalization Normalization::ImageNet(int channels) {
  if (channels == 3) return {{0.485f, 0.456f, 0.406f}, {0.229f, 0.224f, 0.225f}};
  const float mean = (0.485f + 0.456f + 0.406f) / 3.0f;
  const float sd = (0.229f + 0.224f + 0.225f) / 3.0f;
  return {std::vector<float>(channels, mean), std::vector<float>(channels, sd)};
}

Normalization Normalization::Identity(int channels) {
  return {std::vector<float>(channels, 0.0f), std::vector<float>(channels, 1.0f)};
}

namespace {

void CheckNormalization(const Normalization& norm, int channels) {
  if (static_cast<int>(norm.mean.size()) != channels ||
      static_cast<int>(norm.stddev.size()) != channels) {
    Fail(ErrorCode::kShapeMismatch,
         "normalization has " + std::to_string(norm.mean.size()) +
             " channels, image has " + std::to_string(channels));
  }
  for (float s : norm.stddev) {
    if (!(s > 0.0f)) {
      Fail(ErrorCode::kInvalidArgument, "normalization stddev must be > 0");
    }
  }
}

}  // namespace

Image Normalize(const Image& image, const Normalization& norm) {
  CheckNormalization(norm, image.channels);
  Image out = image;
  for (int c = 0; c < out.channels; ++c) {
    const float mean = norm.mean[c];
    const float inv = 1.0f / norm.stddev[c];
    for (float& v : out.plane(c)) v = (v - mean) * inv;
  }
  return out;
}

std::vector<float> NormalizedBlack(const Normalization& norm, int channels) {
  CheckNormalization(norm, channels);
  std::vector<float> out(channels);
  for (int c = 0; c < channels; ++c) {
    out[c] = (kMaskedValue - norm.mean[c]) * (1.0f / norm.stddev[c]);
  }
  return out;
}

Image Preprocess(const Image& raw, int target_size, const Normalization& norm) {
  if (raw.empty()) Fail(ErrorCode::kInvalidImage, "empty image");
  const ResizePlan plan = PlanLetterbox(raw.height, raw.width, target_size);
  return Normalize(ResizeImage(raw, plan), norm);
}

}  // namespace maskaudit
