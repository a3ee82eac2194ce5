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

#ifndef MASKAUDIT_MASKING_MASK_OPS_H_
#define MASKAUDIT_MASKING_MASK_OPS_H_

#include <array>
#include <string_view>
#include <vector>

#include "core/image.h"

namespace maskaudit {

// The five dataset variants. Order matches the rows/columns of every
// cross-masking matrix.
enum class MaskingStrategy { kFull = 0, kNoRoi, kNoRoiBb, kOnlyRoi, kOnlyRoiBb };

inline constexpr std::array<MaskingStrategy, 5> kAllStrategies = {
    MaskingStrategy::kFull, MaskingStrategy::kNoRoi, MaskingStrategy::kNoRoiBb,
    MaskingStrategy::kOnlyRoi, MaskingStrategy::kOnlyRoiBb};

// Canonical identifiers: FULL, NO_ROI, NO_ROI_BB, ONLY_ROI, ONLY_ROI_BB.
std::string_view StrategyName(MaskingStrategy strategy);
// Short labels for figure axes.
std::string_view StrategyLabel(MaskingStrategy strategy);
// Accepts canonical identifiers, case-insensitively. Throws kInvalidArgument.
MaskingStrategy ParseStrategy(std::string_view text);
inline int StrategyIndex(MaskingStrategy s) { return static_cast<int>(s); }

// Pixel value written into removed regions.
inline constexpr float kMaskedValue = 0.0f;

// Inclusive pixel bounds.
struct BoundingBox {
  int row_min = 0;
  int col_min = 0;
  int row_max = 0;
  int col_max = 0;

  bool operator==(const BoundingBox&) const = default;
};

// Minimal axis-aligned box over all foreground pixels, spanning every
// connected component. Throws kEmptyMask when nothing is foreground.
BoundingBox ComputeBoundingBox(const BinaryMask& mask);

// Filled box as a mask of the given size.
BinaryMask BoxMask(int height, int width, const BoundingBox& box);

// Dilation by a disc of radius `factor` pixels: a pixel is foreground iff
// its Euclidean distance to the nearest input foreground pixel is at most
// `factor`. Factor 0 is the identity. Runs in O(height * width) through an
// exact squared Euclidean distance transform.
BinaryMask Dilate(const BinaryMask& mask, int factor);

// Exact squared distance of every pixel to the nearest foreground pixel;
// pixels with no foreground in the mask get a large sentinel.
std::vector<long long> SquaredDistanceTransform(const BinaryMask& mask);

// FULL returns the image untouched and ignores `mask` (which may be null).
// NO_ROI* overwrite the region with `fill`; ONLY_ROI* overwrite everything
// outside it. *_BB variants use the filled bounding box of `mask` as the
// region; an all-background mask yields an empty region.
Image ApplyMasking(const Image& image, const BinaryMask* mask,
                   MaskingStrategy strategy, float fill = kMaskedValue);

// Aspect-preserving resize of the longest side to `target_size`, then centered
// zero padding to a square. An odd residual pixel goes to the bottom/right.
struct ResizePlan {
  int source_height = 0;
  int source_width = 0;
  int target_size = 0;
  int content_height = 0;
  int content_width = 0;
  int pad_top = 0;
  int pad_left = 0;

  bool operator==(const ResizePlan&) const = default;
};

ResizePlan PlanLetterbox(int height, int width, int target_size = 512);
Image ResizeImage(const Image& image, const ResizePlan& plan);       // bilinear
BinaryMask ResizeMask(const BinaryMask& mask, const ResizePlan& plan);  // nearest

// Per-channel affine normalization (x - mean) / std.
struct Normalization {
  std::vector<float> mean;
  std::vector<float> stddev;

  // ImageNet statistics; single-channel images use the channel averages.
  static Normalization ImageNet(int channels);
  static Normalization Identity(int channels);
  bool operator==(const Normalization&) const = default;
};

Image Normalize(const Image& image, const Normalization& norm);
// Value a raw black pixel takes after normalization, per channel.
std::vector<float> NormalizedBlack(const Normalization& norm, int channels);

// Letterbox to `target_size` followed by normalization.
Image Preprocess(const Image& raw, int target_size, const Normalization& norm);

}  // namespace maskaudit

#endif  // MASKAUDIT_MASKING_MASK_OPS_H_
