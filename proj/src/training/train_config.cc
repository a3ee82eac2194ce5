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

#include "training/train_config.h"

#include <algorithm>

#include "core/error.h"

namespace maskaudit {
namespace {

Augmentations TableAugmentations() {
  Augmentations a;
  a.rotation_degrees = 45.0;
  a.hflip_probability = 0.5;
  a.brightness_min = 0.7;
  a.brightness_max = 1.1;
  return a;
}

template <typename T>
void Read(const nlohmann::json& j, const char* key, T* out) {
  if (!j.contains(key)) return;
  try {
    *out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    Fail(ErrorCode::kConfigError,
         std::string("train.") + key + " has the wrong type");
  }
}

}  // namespace

std::string LossName(LossKind loss) {
  return loss == LossKind::kCrossEntropy ? "cross_entropy"
                                         : "weighted_cross_entropy";
}

LossKind ParseLoss(const std::string& text) {
  if (text == "cross_entropy") return LossKind::kCrossEntropy;
  if (text == "weighted_cross_entropy") return LossKind::kWeightedCrossEntropy;
  Fail(ErrorCode::kConfigError,
       "train.loss must be cross_entropy or weighted_cross_entropy, got '" +
           text + "'");
}

TrainConfig TrainConfig::ChestDefaults() {
  TrainConfig c;
  c.augmentations = TableAugmentations();
  return c;
}

TrainConfig TrainConfig::FundusDefaults() {
  TrainConfig c = ChestDefaults();
  c.learning_rate = 1e-4;
  c.loss = LossKind::kWeightedCrossEntropy;
  return c;
}

TrainConfig TrainConfig::DeskDefaults() {
  TrainConfig c;
  c.backbone = "small_cnn";
  c.widths = {8, 16, 32};
  c.input_size = 64;
  c.frozen_prefix = false;
  c.learning_rate = 3e-3;
  c.batch_size = 32;
  c.max_epochs = 30;
  c.early_stop_patience = 4;
  c.early_stop_delta = 5e-3;
  return c;
}

NetworkSpec TrainConfig::Network(int channels, int num_classes) const {
  NetworkSpec spec;
  spec.backbone = backbone;
  spec.channels = channels;
  spec.input_size = input_size;
  spec.num_classes = num_classes;
  spec.widths = widths;
  return spec;
}

void TrainConfig::Validate() const {
  if (!(learning_rate > 0.0)) {
    Fail(ErrorCode::kConfigError, "train.learning_rate must be positive");
  }
  if (batch_size < 1) Fail(ErrorCode::kConfigError, "train.batch_size must be >= 1");
  if (max_epochs < 1) Fail(ErrorCode::kConfigError, "train.max_epochs must be >= 1");
  if (early_stop_patience < 1) {
    Fail(ErrorCode::kConfigError, "train.early_stop_patience must be >= 1");
  }
  if (!(early_stop_delta >= 0.0)) {
    Fail(ErrorCode::kConfigError, "train.early_stop_delta must be >= 0");
  }
  if (input_size < 8) Fail(ErrorCode::kConfigError, "train.input_size must be >= 8");
  if (backbone.empty()) Fail(ErrorCode::kConfigError, "train.backbone is empty");
  for (int w : widths) {
    if (w < 1) Fail(ErrorCode::kConfigError, "train.widths must be positive");
  }
  const auto& a = augmentations;
  if (a.rotation_degrees && !(*a.rotation_degrees >= 0.0)) {
    Fail(ErrorCode::kConfigError, "rotation degrees must be >= 0");
  }
  if (a.hflip_probability &&
      !(*a.hflip_probability >= 0.0 && *a.hflip_probability <= 1.0)) {
    Fail(ErrorCode::kConfigError, "hflip probability must lie in [0, 1]");
  }
  if (a.brightness_min.has_value() != a.brightness_max.has_value() ||
      (a.brightness_min &&
       !(*a.brightness_min > 0.0 && *a.brightness_min <= *a.brightness_max))) {
    Fail(ErrorCode::kConfigError,
         "brightness needs 0 < min <= max, both present");
  }
}

nlohmann::json TrainConfig::ToJson() const {
  nlohmann::json aug = nlohmann::json::array();
  if (augmentations.rotation_degrees) {
    aug.push_back({{"type", "rotation"}, {"degrees", *augmentations.rotation_degrees}});
  }
  if (augmentations.hflip_probability) {
    aug.push_back({{"type", "hflip"}, {"p", *augmentations.hflip_probability}});
  }
  if (augmentations.brightness_min) {
    aug.push_back({{"type", "brightness"},
                   {"min", *augmentations.brightness_min},
                   {"max", *augmentations.brightness_max}});
  }
  return {{"backbone", backbone},
          {"widths", widths},
          {"input_size", input_size},
          {"frozen_prefix", frozen_prefix},
          {"learning_rate", learning_rate},
          {"batch_size", batch_size},
          {"loss", LossName(loss)},
          {"max_epochs", max_epochs},
          {"early_stop_patience", early_stop_patience},
          {"early_stop_delta", early_stop_delta},
          {"optimizer", "adam"},
          {"augmentations", aug},
          {"seed", seed}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) Fail(ErrorCode::kConfigError, "train must be an object");
  TrainConfig c = ChestDefaults();
  static const char* kKnown[] = {
      "backbone", "widths", "input_size", "frozen_prefix", "learning_rate",
      "batch_size", "loss", "max_epochs", "early_stop_patience",
      "early_stop_delta", "optimizer", "augmentations", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(std::begin(kKnown), std::end(kKnown), key) == std::end(kKnown)) {
      Fail(ErrorCode::kConfigError, "train." + key + " is not a known key");
    }
  }
  Read(j, "backbone", &c.backbone);
  Read(j, "widths", &c.widths);
  Read(j, "input_size", &c.input_size);
  Read(j, "frozen_prefix", &c.frozen_prefix);
  Read(j, "learning_rate", &c.learning_rate);
  Read(j, "batch_size", &c.batch_size);
  Read(j, "max_epochs", &c.max_epochs);
  Read(j, "early_stop_patience", &c.early_stop_patience);
  Read(j, "early_stop_delta", &c.early_stop_delta);
  Read(j, "seed", &c.seed);
  if (j.contains("optimizer") && j["optimizer"] != "adam") {
    Fail(ErrorCode::kConfigError, "train.optimizer supports only adam");
  }
  if (j.contains("loss")) {
    std::string loss;
    Read(j, "loss", &loss);
    c.loss = ParseLoss(loss);
  }
  if (j.contains("augmentations")) {
    const auto& list = j["augmentations"];
    if (!list.is_array()) {
      Fail(ErrorCode::kConfigError, "train.augmentations must be a list");
    }
    c.augmentations = {};
    for (const auto& item : list) {
      const std::string type = item.value("type", "");
      try {
        if (type == "rotation") {
          c.augmentations.rotation_degrees = item.at("degrees").get<double>();
        } else if (type == "hflip") {
          c.augmentations.hflip_probability = item.value("p", 0.5);
        } else if (type == "brightness") {
          c.augmentations.brightness_min = item.at("min").get<double>();
          c.augmentations.brightness_max = item.at("max").get<double>();
        } else {
          Fail(ErrorCode::kConfigError,
               "unknown augmentation type '" + type + "'");
        }
      } catch (const nlohmann::json::exception&) {
        Fail(ErrorCode::kConfigError, "malformed augmentation '" + type + "'");
      }
    }
  }
  c.Validate();
  return c;
}

}  // namespace maskaudit
