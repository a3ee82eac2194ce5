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

#ifndef MASKAUDIT_DATA_SYNTHETIC_H_
#define MASKAUDIT_DATA_SYNTHETIC_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "core/image.h"
#include "data/image_store.h"
#include "data/manifest.h"

namespace maskaudit {

// Planted-shortcut generator. Each image shows a bright disc (the ROI) with
// an inner cup on a noisy background. The label follows the cup-to-disc
// ratio; a corner tag outside the ROI and the disc radius can be made to
// leak the label as well. Label-independent bright strokes texture the
// background.
struct SyntheticConfig {
  int n_samples = 2000;
  int image_size = 64;
  double roi_feature_strength = 1.0;  // 1: cup ratio decides the label
  double shortcut_strength = 0.0;     // rho: tag/label correlation
  double size_confound = 0.0;         // radius shift between classes
  double prevalence = 0.5;
  bool invert_tag = false;            // tag marks negatives instead
  int texture_strokes = 16;           // vessel-like background strokes
  uint64_t seed = 0;
  std::string id_prefix = "syn";

  // Throws kConfigError naming the offending field.
  void Validate() const;
};

inline constexpr double kCupRatioThreshold = 0.5;

// Ground truth of the planted features, per sample.
struct SyntheticTruth {
  bool tag = false;
  double cup_ratio = 0.0;
  double radius = 0.0;
  int center_row = 0;
  int center_col = 0;
};

struct SyntheticDataset {
  DatasetManifest manifest;
  std::vector<Image> images;  // 1 x size x size, 8-bit quantized
  std::vector<BinaryMask> masks;
  std::vector<SyntheticTruth> truth;
};

SyntheticDataset GenerateSynthetic(const SyntheticConfig& config);

// Pixel box of the corner tag for a given image size.
struct TagGeometry {
  int offset = 0;
  int size = 0;
};
TagGeometry SyntheticTagGeometry(int image_size);

// Same draw with the tag forced on or off; everything else unchanged.
Image RenderSyntheticWithTag(const SyntheticConfig& config, size_t index,
                             bool tag);

// Writes `<root>/{images,masks}/<id>.png` and `<root>/manifest.csv`.
void WriteSyntheticDataset(const SyntheticDataset& dataset,
                           const std::filesystem::path& root);

InMemoryImageStore MakeInMemoryStore(const SyntheticDataset& dataset);

}  // namespace maskaudit

#endif  // MASKAUDIT_DATA_SYNTHETIC_H_
