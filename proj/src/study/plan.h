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

#ifndef MASKAUDIT_STUDY_PLAN_H_
#define MASKAUDIT_STUDY_PLAN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "data/manifest.h"
#include "masking/mask_ops.h"

namespace maskaudit {

enum class StudyPhase { kPilot, kMain };
std::string_view PhaseName(StudyPhase phase);
// kInvalidArgument for anything but "pilot" / "main".
StudyPhase ParsePhase(std::string_view text);

enum class PercentileSlot { kHigh, kMedian, kLow };
std::string_view SlotName(PercentileSlot slot);
PercentileSlot ParseSlot(std::string_view text);

// Why an image was picked. Never sent to the reader.
struct SelectionBasis {
  std::string condition;
  PercentileSlot slot = PercentileSlot::kHigh;
  double probability = 0.0;
  bool operator==(const SelectionBasis&) const = default;
};

struct StudyItem {
  std::string item_id;  // opaque, position-derived
  std::string image_id;
  MaskingStrategy strategy = MaskingStrategy::kFull;
  std::string image_url;
  std::optional<SelectionBasis> basis;  // main phase only
  bool operator==(const StudyItem&) const = default;
};

struct StudyPlan {
  StudyPhase phase = StudyPhase::kMain;
  uint64_t seed = 0;
  std::vector<std::string> class_names;
  std::vector<StudyItem> items;

  const StudyItem* Find(std::string_view item_id) const;  // nullptr if absent
  nlohmann::json ToJson() const;
  static StudyPlan FromJson(const nlohmann::json& j);
  bool operator==(const StudyPlan&) const = default;
};

// Probabilities of the models trained on `strategy`, evaluated on that
// strategy's masked images.
struct StrategyPredictions {
  MaskingStrategy strategy = MaskingStrategy::kFull;
  std::vector<std::string> image_ids;
  std::vector<float> probabilities;  // n x k, class order of the manifest
};

// Three items per (condition, strategy): the highest probability, the
// lower-middle element of the ascending order, and the lowest. Equal
// probabilities fall back to image id order. Items are shuffled with
// `seed`. Throws kInsufficientImages below three images, kSchemaError when
// the prediction sets disagree on images or classes, kInvalidArgument for
// per_cell other than 3.
StudyPlan SelectStudyImages(std::span<const StrategyPredictions> predictions,
                            const DatasetManifest& manifest, uint64_t seed,
                            int per_cell = 3);

// `count` distinct images drawn uniformly from `pool`, served unmasked.
StudyPlan SelectPilotImages(std::span<const std::string> pool,
                            const DatasetManifest& manifest, uint64_t seed,
                            int count = 10);

}  // namespace maskaudit

#endif  // MASKAUDIT_STUDY_PLAN_H_
