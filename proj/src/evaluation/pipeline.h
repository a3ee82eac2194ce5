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

#ifndef MASKAUDIT_EVALUATION_PIPELINE_H_
#define MASKAUDIT_EVALUATION_PIPELINE_H_

#include <array>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "core/csv.h"
#include "data/image_store.h"
#include "data/manifest.h"
#include "data/materialize.h"
#include "evaluation/delong.h"
#include "masking/mask_ops.h"
#include "training/trainer.h"

namespace maskaudit {

inline constexpr std::array<int, 10> kDefaultDilationFactors = {
    0, 5, 10, 25, 50, 100, 150, 200, 300, 500};

struct AucCell {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> fold_aucs;
  bool operator==(const AucCell&) const = default;
};

// Rows are training strategies, columns evaluation strategies.
struct AucMatrix {
  std::string class_name;
  std::vector<MaskingStrategy> train_strategies;
  std::vector<MaskingStrategy> eval_strategies;
  std::vector<std::vector<AucCell>> cells;  // [row][column]

  // Throws kNotFound when either strategy is not an axis entry.
  const AucCell& cell(MaskingStrategy train, MaskingStrategy eval) const;
  // kIncompleteRun for a ragged grid, kInvalidArgument for a value outside
  // [0, 1], a NaN or a negative std.
  void Validate() const;
  nlohmann::json ToJson() const;
  static AucMatrix FromJson(const nlohmann::json& j);
  bool operator==(const AucMatrix&) const = default;
};

// Trained models keyed by (strategy, fold).
class ModelSet {
 public:
  void Add(std::shared_ptr<const TrainedModel> model);
  // nullptr when absent.
  const TrainedModel* Find(MaskingStrategy strategy, int fold) const;
  // "STRATEGY/fold N" for each missing pair.
  std::vector<std::string> Gaps(std::span<const MaskingStrategy> strategies,
                                int folds) const;
  // Throws kIncompleteRun listing the gaps.
  void RequireComplete(std::span<const MaskingStrategy> strategies, int folds) const;
  size_t size() const { return models_.size(); }

 private:
  std::map<std::pair<int, int>, std::shared_ptr<const TrainedModel>> models_;
};

// The images a set of models is evaluated on.
struct EvalData {
  const DatasetManifest* manifest = nullptr;
  const ImageStore* store = nullptr;
  std::vector<std::string> image_ids;  // sorted on use
  MaterializeOptions options;          // normalization comes from each model
  int max_parallel = 1;
};

// Probabilities of every (train strategy, fold) model on every evaluation
// variant of the same images.
struct PredictionGrid {
  std::vector<std::string> class_names;
  std::vector<std::string> image_ids;
  std::vector<uint8_t> labels;  // n x k
  std::vector<MaskingStrategy> train_strategies;
  std::vector<MaskingStrategy> eval_strategies;
  int folds = 0;
  std::vector<std::vector<float>> scores;  // [(row * folds + fold) * cols + col]

  size_t num_classes() const { return class_names.size(); }
  std::vector<double> ClassScores(size_t row, int fold, size_t col, size_t cls) const;
  std::vector<uint8_t> ClassLabels(size_t cls) const;
};

PredictionGrid PredictGrid(const ModelSet& models,
                           std::span<const MaskingStrategy> train_strategies,
                           std::span<const MaskingStrategy> eval_strategies,
                           int folds, const EvalData& data);

// One matrix per class; cell = fold mean/std of the per-fold AUC.
std::vector<AucMatrix> CrossMaskingMatrix(const PredictionGrid& grid);

// Per-fold DeLong comparison of two training strategies on one evaluation
// variant. A zero difference variance with unequal AUCs is recorded as
// p = 0, z = 0 with `degenerate` set.
struct FoldDelong {
  DelongResult result;
  bool degenerate = false;
  bool operator==(const FoldDelong&) const = default;
};

struct StrategyComparison {
  std::string class_name;
  MaskingStrategy eval_strategy = MaskingStrategy::kFull;
  MaskingStrategy strategy_a = MaskingStrategy::kFull;
  MaskingStrategy strategy_b = MaskingStrategy::kFull;
  std::vector<FoldDelong> folds;
  bool significant = false;  // p < alpha in at least min_folds folds
  nlohmann::json ToJson() const;
  static StrategyComparison FromJson(const nlohmann::json& j);
  bool operator==(const StrategyComparison&) const = default;
};

FoldDelong SafeDelong(std::span<const double> a, std::span<const double> b,
                      std::span<const uint8_t> labels);

// All unordered pairs of training strategies within each evaluation column.
std::vector<StrategyComparison> CompareStrategies(const PredictionGrid& grid,
                                                  double alpha = 0.05,
                                                  int min_folds = 3);

struct DilationCurve {
  std::string class_name;
  MaskingStrategy strategy = MaskingStrategy::kNoRoi;
  DilationSubgroup subgroup = DilationSubgroup::kAll;
  std::vector<int> factors;
  std::vector<double> auc_mean;
  std::vector<double> auc_std;
  std::vector<std::vector<double>> fold_aucs;  // [factor][fold]

  // kInvalidArgument unless factors strictly increase and lengths agree.
  void Validate() const;
  nlohmann::json ToJson() const;
  static DilationCurve FromJson(const nlohmann::json& j);
  bool operator==(const DilationCurve&) const = default;
};

// Evaluates each fold model on `strategy` while the masks of the selected
// subgroup are dilated by each factor. One curve per class.
std::vector<DilationCurve> DilationSweep(
    std::span<const TrainedModel* const> fold_models, const EvalData& data,
    MaskingStrategy strategy, std::span<const int> factors,
    DilationSubgroup subgroup, int subgroup_class = 0);

struct OodRow {
  std::string class_name;
  MaskingStrategy strategy = MaskingStrategy::kFull;
  std::vector<double> fold_aucs;
  double mean = 0.0;
  double std = 0.0;
  bool starred = false;
  bool operator==(const OodRow&) const = default;
};

struct OodTable {
  std::vector<OodRow> rows;  // class-major, strategies in input order
  const OodRow& row(const std::string& class_name, MaskingStrategy strategy) const;
  nlohmann::json ToJson() const;
  static OodTable FromJson(const nlohmann::json& j);
  bool operator==(const OodTable&) const = default;
};

// Models evaluated on FULL external images. The best strategy per class is
// starred when it is significantly better than every other strategy.
// Throws kSchemaError when the external classes differ from `class_names`.
OodTable OodEvaluate(const ModelSet& models,
                     std::span<const MaskingStrategy> strategies, int folds,
                     const std::vector<std::string>& class_names,
                     const EvalData& external, double alpha = 0.05,
                     int min_folds = 3);

// Long-format tables, one row per class/strategy/fold.
CsvTable MatrixCsv(const std::vector<AucMatrix>& matrices);
CsvTable ComparisonCsv(const std::vector<StrategyComparison>& comparisons);
CsvTable CurveCsv(const std::vector<DilationCurve>& curves);
CsvTable OodCsv(const OodTable& table);

}  // namespace maskaudit

#endif  // MASKAUDIT_EVALUATION_PIPELINE_H_
