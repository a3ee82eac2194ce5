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

#ifndef MASKAUDIT_TRAINING_TABULAR_H_
#define MASKAUDIT_TRAINING_TABULAR_H_

#include <string>
#include <vector>

#include <json.hpp>

#include "data/folds.h"
#include "data/manifest.h"

namespace maskaudit {

// Logistic regression on patient metadata only: one-hot sex and projection
// plus standardized birth year. Rows missing any of the three are dropped.
struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  double Logit(const std::vector<double>& x) const;
};

struct TabularModel {
  std::vector<std::string> sex_levels;  // sorted, from the training rows
  double year_mean = 0.0;
  double year_std = 1.0;
  std::vector<LogisticModel> per_class;

  // Empty when the sample lacks a feature.
  std::vector<double> Features(const Sample& sample) const;
};

bool HasTabularFeatures(const Sample& sample);

// Newton/IRLS fit with a tiny ridge so separable data stays finite.
// Throws kDegenerateLabels when a class has a single label value among the
// usable rows, kInvalidArgument when no row is usable.
LogisticModel FitLogistic(const std::vector<std::vector<double>>& x,
                          const std::vector<uint8_t>& y);
TabularModel TrainTabularBaseline(const DatasetManifest& manifest,
                                  const std::vector<std::string>& train_ids);
// Logit scores, n x k row-major, for usable samples in `ids` (order kept);
// `used` receives their ids.
std::vector<double> ScoreTabular(const TabularModel& model,
                                 const DatasetManifest& manifest,
                                 const std::vector<std::string>& ids,
                                 std::vector<std::string>* used);

struct TabularClassResult {
  std::string class_name;
  std::vector<double> fold_aucs;
  double mean = 0.0;
  double std = 0.0;
};

struct TabularBaselineResult {
  std::vector<TabularClassResult> classes;
  size_t rows_used = 0;
  size_t rows_dropped = 0;
  nlohmann::json ToJson() const;
};

// One model per fold on the fold's training ids, scored on the held-out test
// set; reports the fold-mean AUC per class.
TabularBaselineResult EvaluateTabularBaseline(const DatasetManifest& manifest,
                                              const FoldAssignment& folds);

}  // namespace maskaudit

#endif  // MASKAUDIT_TRAINING_TABULAR_H_
