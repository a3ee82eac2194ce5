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

#ifndef MASKAUDIT_ATTRIBUTION_SHAP_H_
#define MASKAUDIT_ATTRIBUTION_SHAP_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <json.hpp>

#include "core/image.h"
#include "core/png_io.h"
#include "training/trainer.h"

namespace maskaudit {

// Superpixel partition: one segment id per pixel, ids 0..count-1.
struct SegmentMap {
  int height = 0;
  int width = 0;
  int count = 0;
  int grid_rows = 0;  // set for grid partitions
  int grid_cols = 0;
  std::vector<int> ids;  // height * width

  int at(int row, int col) const { return ids[static_cast<size_t>(row) * width + col]; }
};

// Regular grid with rows * cols as close to `target` as the image allows,
// then as square as possible (rows <= cols on ties). Throws
// kInvalidArgument for target < 2 or target above the pixel count.
SegmentMap GridSegments(int height, int width, int target);

// Scores a batch of raw images for one class. Must return one value per
// image.
using ScoreFunction = std::function<std::vector<double>(std::span<const Image>)>;

// Probability of `class_index` from a trained model; images are normalized
// with the model's statistics before the forward pass.
ScoreFunction ModelScore(const TrainedModel& model, int class_index);

// Copy of `image` with every segment whose coalition bit is off set to 0.
Image Occlude(const Image& image, const SegmentMap& segments,
              const std::vector<uint8_t>& coalition);

struct ShapOptions {
  int n_evaluations = 1000;
  uint64_t seed = 0;
  int batch_size = 64;
};

struct AttributionMap {
  std::vector<double> values;  // one per segment
  double base_value = 0.0;     // fully occluded image
  double full_value = 0.0;     // intact image
  int class_index = 0;
  int n_evaluations = 0;
  bool exact = false;  // every coalition enumerated
  nlohmann::json ToJson() const;
  static AttributionMap FromJson(const nlohmann::json& j);
  bool operator==(const AttributionMap&) const = default;
};

// Kernel SHAP over segment coalitions, with the efficiency constraint
// (base + sum = full) enforced. When 2^S <= n_evaluations every coalition
// is evaluated, otherwise sizes are drawn from the Shapley kernel and
// subsets in complementary pairs. Throws kInvalidArgument when
// n_evaluations < S + 2, kModelOutputError on non-finite scores.
AttributionMap KernelShap(const ScoreFunction& score, const Image& image,
                          const SegmentMap& segments, int class_index,
                          const ShapOptions& options = {});

// Shapley values by the permutation-weighted subset formula over all 2^S
// coalitions of a set function on bitmasks. Reference for tests.
std::vector<double> ExactShapley(int players,
                                 const std::function<double(uint32_t)>& value);

// Gray image under a red (positive) / blue (negative) tint, scaled
// symmetrically by the largest absolute value. Zero values leave the image
// untouched.
RgbRaster RenderOverlay(const Image& image, const SegmentMap& segments,
                        const AttributionMap& attribution);
void WriteOverlayPng(const std::filesystem::path& path, const Image& image,
                     const SegmentMap& segments, const AttributionMap& attribution);

}  // namespace maskaudit

#endif  // MASKAUDIT_ATTRIBUTION_SHAP_H_
