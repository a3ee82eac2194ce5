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

#ifndef MASKAUDIT_REPORT_RUN_RECORD_H_
#define MASKAUDIT_REPORT_RUN_RECORD_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "attribution/shap.h"
#include "embeddings/embeddings.h"
#include "evaluation/pipeline.h"

namespace maskaudit {

// One explained prediction. The partition is GridSegments(height, width,
// segments), so the map can be redrawn without the source image.
struct AttributionEntry {
  std::string image_id;
  MaskingStrategy strategy = MaskingStrategy::kFull;  // of the explained model
  int fold = 0;
  std::string class_name;
  int height = 0;
  int width = 0;
  int segments = 0;
  AttributionMap map;

  nlohmann::json ToJson() const;
  static AttributionEntry FromJson(const nlohmann::json& j);
  bool operator==(const AttributionEntry&) const = default;
};

// Everything a run produced. Rendering reads only this.
struct RunRecord {
  std::string run_id;
  nlohmann::json config = nlohmann::json::object();
  uint64_t manifest_hash = 0;
  uint64_t seed = 0;
  std::vector<AucMatrix> matrices;
  std::vector<DilationCurve> curves;
  std::vector<StrategyComparison> comparisons;
  std::optional<OodTable> ood;
  std::vector<CosineReport> cosine;
  std::vector<ProjectedPoint> projection;
  std::map<std::string, double> silhouettes;  // strategy name -> score
  std::vector<AttributionEntry> attributions;

  // kIncompleteRun without a run id; otherwise validates every part.
  void Validate() const;
  bool operator==(const RunRecord&) const = default;
};

// Writes `summary.json` and results/{matrices,curves,delong,embeddings,
// attributions}/ under `out_dir`, overwriting earlier exports. Numbers are
// written as shortest round-trip decimals. Returns the artifact paths
// relative to `out_dir`, sorted; the summary lists the same paths. Throws
// kIoError when the directory cannot be written.
std::vector<std::string> ExportRun(const RunRecord& record,
                                   const std::filesystem::path& out_dir);

// Rebuilds a record from an export.
RunRecord LoadRun(const std::filesystem::path& out_dir);

}  // namespace maskaudit

#endif  // MASKAUDIT_REPORT_RUN_RECORD_H_
