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

#ifndef MASKAUDIT_EXPERIMENT_STAGES_H_
#define MASKAUDIT_EXPERIMENT_STAGES_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "data/folds.h"
#include "data/image_store.h"
#include "data/manifest.h"
#include "evaluation/pipeline.h"
#include "experiment/config.h"
#include "report/run_record.h"
#include "study/service.h"

namespace maskaudit {

enum class Stage { kGenerate, kPrepare, kTrain, kEvaluate, kSweep, kEmbed, kAttribute, kReport };

std::string_view StageName(Stage stage);
// kInvalidArgument for unknown names.
Stage ParseStage(std::string_view name);

struct StageResult {
  Stage stage = Stage::kGenerate;
  int units_run = 0;
  int units_skipped = 0;
  std::vector<std::string> notes;
};

// One experiment rooted at config.output_root. Stages are resumable: work
// whose output already exists for the same configuration is skipped.
//
//   <output_root>/config.json                  resolved config snapshot
//   <output_root>/splits.json
//   <output_root>/models/<STRATEGY>/fold<k>.ckpt (+ .history.csv)
//   <output_root>/predictions/test.csv
//   <output_root>/study/{pilot,main}_plan.json, annotations.jsonl
//   <output_root>/attributions/*.png
//   <output_root>/summary.json, results/...   report export
//   <data_root>/synthetic-<hash>/               generated datasets
class Experiment {
 public:
  explicit Experiment(ExperimentConfig config);
  ~Experiment();

  const ExperimentConfig& config() const { return config_; }
  // 0 uses every core.
  void set_max_parallel(int n) { config_.max_parallel = n; }
  StageResult Run(Stage stage);

  std::filesystem::path DatasetDir(const DatasetSource& source) const;
  std::filesystem::path ManifestPath(const DatasetSource& source) const;
  std::filesystem::path CheckpointPath(MaskingStrategy strategy, int fold) const;
  std::filesystem::path SplitsPath() const;
  std::filesystem::path PlanPath(StudyPhase phase) const;
  std::filesystem::path AnnotationLogPath() const;

  // Loaded on first use; kNotFound when the stage that makes them has not
  // run.
  const DatasetManifest& manifest();
  const ImageStore& store();
  const FoldAssignment& folds();
  ModelSet LoadModels(std::span<const MaskingStrategy> strategies);
  RunRecord LoadRecord();

 private:
  struct Data;
  StageResult Generate();
  StageResult Prepare();
  StageResult TrainAll();
  StageResult Evaluate();
  StageResult Sweep();
  StageResult Embed();
  StageResult Attribute();
  StageResult Report();
  void SaveRecord(const RunRecord& record);
  void WriteSnapshot() const;
  EvalData TestData();

  ExperimentConfig config_;
  std::unique_ptr<Data> main_;
  std::unique_ptr<Data> external_;
  std::optional<FoldAssignment> folds_;
};

// The reader study of a finished `evaluate` run with the study toggle on.
class StudyServer {
 public:
  explicit StudyServer(Experiment* experiment);
  ~StudyServer();
  // Returns the bound port.
  int Start(const StudyServiceOptions& options);
  void Wait();
  void Stop();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace maskaudit

#endif  // MASKAUDIT_EXPERIMENT_STAGES_H_
