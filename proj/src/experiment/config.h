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

#ifndef MASKAUDIT_EXPERIMENT_CONFIG_H_
#define MASKAUDIT_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/folds.h"
#include "data/materialize.h"
#include "data/synthetic.h"
#include "embeddings/embeddings.h"
#include "masking/mask_ops.h"
#include "training/train_config.h"

namespace maskaudit {

// Where a dataset comes from: a generator config or a manifest CSV.
struct DatasetSource {
  bool synthetic = true;
  SyntheticConfig generator;
  std::filesystem::path manifest;  // relative paths resolve against data_root

  nlohmann::json ToJson() const;
};

struct DilationSettings {
  std::vector<int> factors;
  std::vector<MaskingStrategy> strategies = {MaskingStrategy::kNoRoi,
                                             MaskingStrategy::kOnlyRoi};
  std::vector<DilationSubgroup> subgroups = {DilationSubgroup::kPositivesOnly,
                                             DilationSubgroup::kNegativesOnly};
  int subgroup_class = 0;
};

struct EmbeddingSettings {
  MaskingStrategy train_strategy = MaskingStrategy::kFull;
  int fold = 0;
  int max_images = 200;
  TsneOptions tsne;
};

struct AttributionSettings {
  MaskingStrategy train_strategy = MaskingStrategy::kNoRoi;
  int fold = 0;
  int segments = 16;
  int n_evaluations = 1000;
  int max_images = 50;
  int class_index = 0;
  bool positives_only = true;
};

struct StudySettings {
  uint64_t seed = 0;
  int pilot_count = 10;
};

struct ExperimentConfig {
  std::string name;
  uint64_t seed = 0;
  std::filesystem::path output_root;
  std::filesystem::path data_root;
  DatasetSource dataset;
  std::optional<DatasetSource> external;  // OOD evaluation set
  int target_size = 64;
  SplitOptions split;
  TrainConfig train;
  std::vector<MaskingStrategy> strategies;
  DilationSettings dilation;
  bool run_embeddings = false;
  bool run_attribution = false;
  bool run_ood = false;
  bool run_study = false;
  EmbeddingSettings embeddings;
  AttributionSettings attribution;
  StudySettings study;
  double alpha = 0.05;
  int min_folds = 3;
  int max_parallel = 1;

  // The resolved configuration, every default filled in.
  nlohmann::json ToJson() const;
};

// Parses and validates a config document. Relative output and data roots
// resolve against `base_dir`; a non-empty `data_root_override` replaces
// the data root. Every problem found is listed in one kConfigError.
ExperimentConfig ParseExperimentConfig(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir,
                                       const std::string& data_root_override = "");

// Reads JSON from disk; the base directory is the file's directory and the
// override comes from MASKAUDIT_DATA_ROOT when set.
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

}  // namespace maskaudit

#endif  // MASKAUDIT_EXPERIMENT_CONFIG_H_
