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

#ifndef MASKAUDIT_DATA_FOLDS_H_
#define MASKAUDIT_DATA_FOLDS_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/manifest.h"

namespace maskaudit {

struct Fold {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;

  bool operator==(const Fold&) const = default;
};

// Held-out test ids plus k train/validation folds over the remaining pool.
// Every masking strategy trains on the same assignment.
struct FoldAssignment {
  std::vector<std::string> test_ids;
  std::vector<Fold> folds;
  uint64_t seed = 0;

  bool operator==(const FoldAssignment&) const = default;

  nlohmann::json ToJson() const;
  static FoldAssignment FromJson(const nlohmann::json& j);
  void Save(const std::filesystem::path& path) const;
  static FoldAssignment Load(const std::filesystem::path& path);
};

struct SplitOptions {
  int k = 5;
  double test_fraction = 0.2;
  uint64_t seed = 0;
  // Keep all images of a patient on one side of every split. Samples without
  // a patient id are their own group.
  bool group_by_patient = false;
};

// Deterministic stratified split. Stratification uses the rarest positive
// class; the test set takes round(test_fraction * units) units and the pool
// is dealt round-robin over k validation folds, so fold sizes differ by at
// most one unit. Throws kStratificationError naming any class with fewer
// than k positives, kInvalidArgument for k < 2 or a fraction outside (0, 1).
FoldAssignment Split(const DatasetManifest& manifest, const SplitOptions& options);

}  // namespace maskaudit

#endif  // MASKAUDIT_DATA_FOLDS_H_
