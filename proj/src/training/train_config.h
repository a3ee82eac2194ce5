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

#ifndef MASKAUDIT_TRAINING_TRAIN_CONFIG_H_
#define MASKAUDIT_TRAINING_TRAIN_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "training/network.h"

namespace maskaudit {

enum class LossKind { kCrossEntropy, kWeightedCrossEntropy };

std::string LossName(LossKind loss);
LossKind ParseLoss(const std::string& text);

// Train-time augmentations applied to raw (unnormalized) images. Absent
// entries are disabled. Rotation angles and brightness factors are drawn
// uniformly from their ranges.
struct Augmentations {
  std::optional<double> rotation_degrees;
  std::optional<double> hflip_probability;
  std::optional<double> brightness_min;
  std::optional<double> brightness_max;

  bool any() const {
    return rotation_degrees || hflip_probability || brightness_min;
  }
  bool operator==(const Augmentations&) const = default;
};

struct TrainConfig {
  std::string backbone = "densenet121";
  std::vector<int> widths = {8, 16, 32};  // small_cnn block widths
  int input_size = 512;
  bool frozen_prefix = true;
  double learning_rate = 1e-5;
  int batch_size = 32;
  LossKind loss = LossKind::kCrossEntropy;
  int max_epochs = 250;
  int early_stop_patience = 10;
  double early_stop_delta = 1e-3;
  Augmentations augmentations;
  uint64_t seed = 0;

  // Hyperparameters of the chest and fundus runs.
  static TrainConfig ChestDefaults();
  static TrainConfig FundusDefaults();
  // Small CNN trained from scratch on synthetic 64x64 data.
  static TrainConfig DeskDefaults();

  NetworkSpec Network(int channels, int num_classes) const;
  // Throws kConfigError naming the offending field.
  void Validate() const;
  nlohmann::json ToJson() const;
  // Missing keys keep the chest defaults. Throws kConfigError.
  static TrainConfig FromJson(const nlohmann::json& j);
  bool operator==(const TrainConfig&) const = default;
};

}  // namespace maskaudit

#endif  // MASKAUDIT_TRAINING_TRAIN_CONFIG_H_
