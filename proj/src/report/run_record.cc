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

#include "report/run_record.h"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "core/csv.h"
#include "core/error.h"
#include "core/file_util.h"
#include "report/figures.h"

namespace maskaudit {
namespace {

namespace fs = std::filesystem;

std::string Slug(std::string_view s) {
  std::string out;
  for (char ch : s) {
    out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_';
  }
  return out.empty() ? "_" : out;
}

std::string Indexed(size_t i, std::string_view name) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu_", i);
  return buf + Slug(name);
}

class Writer {
 public:
  explicit Writer(fs::path root) : root_(std::move(root)) {}

  void Json(const std::string& rel, const nlohmann::json& j) {
    Text(rel, j.dump(2) + "\n");
  }
  void Text(const std::string& rel, const std::string& text) {
    WriteTextFile(root_ / rel, text);
    paths_.push_back(rel);
  }
  void Csv(const std::string& rel, const CsvTable& t) { Text(rel, FormatCsv(t)); }
  void Png(const std::string& rel, const RgbRaster& r) {
    WritePngRgb(root_ / rel, r);
    paths_.push_back(rel);
  }
  std::vector<std::string> Paths() const {
    std::vector<std::string> p = paths_;
    std::sort(p.begin(), p.end());
    return p;
  }

 private:
  fs::path root_;
  std::vector<std::string> paths_;
};

nlohmann::json ReadJson(const fs::path& path) {
  try {
    return nlohmann::json::parse(ReadTextFile(path));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

CsvTable CosineCsv(const std::vector<CosineReport>& reports) {
  CsvTable t;
  t.header = {"strategy", "group", "mean", "std", "count"};
  for (const auto& r : reports) {
    const std::string s(StrategyName(r.strategy));
    t.rows.push_back({s, "all", FormatDouble(r.all.mean), FormatDouble(r.all.std),
                      std::to_string(r.all.count)});
    for (size_t c = 0; c < r.class_names.size(); ++c) {
      const CosineSummary& p = r.per_class[c];
      t.rows.push_back({s, r.class_names[c], FormatDouble(p.mean), FormatDouble(p.std),
                        std::to_string(p.count)});
    }
  }
  return t;
}

RgbRaster AttributionFigure(const AttributionEntry& e) {
  const SegmentMap seg = GridSegments(e.height, e.width, e.segments);
  Image gray(1, e.height, e.width);
  std::fill(gray.data.begin(), gray.data.end(), 0.5f);
  return RenderOverlay(gray, seg, e.map);
}

}  // namespace

nlohmann::json AttributionEntry::ToJson() const {
  return {{"image_id", image_id}, {"strategy", std::string(StrategyName(strategy))},
          {"fold", fold},         {"class_name", class_name},
          {"height", height},     {"width", width},
          {"segments", segments}, {"map", map.ToJson()}};
}

AttributionEntry AttributionEntry::FromJson(const nlohmann::json& j) {
  AttributionEntry e;
  try {
    e.image_id = j.at("image_id").get<std::string>();
    e.strategy = ParseStrategy(j.at("strategy").get<std::string>());
    e.fold = j.at("fold").get<int>();
    e.class_name = j.at("class_name").get<std::string>();
    e.height = j.at("height").get<int>();
    e.width = j.at("width").get<int>();
    e.segments = j.at("segments").get<int>();
    e.map = AttributionMap::FromJson(j.at("map"));
  } catch (const nlohmann::json::exception& ex) {
    Fail(ErrorCode::kSchemaError, std::string("attribution entry: ") + ex.what());
  }
  return e;
}

void RunRecord::Validate() const {
  if (run_id.empty()) Fail(ErrorCode::kIncompleteRun, "run record has no run id");
  for (const auto& m : matrices) m.Validate();
  for (const auto& c : curves) c.Validate();
  for (const auto& a : attributions) {
    if (static_cast<int>(a.map.values.size()) != a.segments) {
      Fail(ErrorCode::kIncompleteRun, "attribution for " + a.image_id +
                                          " does not cover its segments");
    }
  }
}

std::vector<std::string> ExportRun(const RunRecord& record, const fs::path& out_dir) {
  record.Validate();
  Writer w(out_dir);
  try {
    fs::create_directories(out_dir);

    nlohmann::json mats = nlohmann::json::array();
    for (size_t i = 0; i < record.matrices.size(); ++i) {
      mats.push_back(record.matrices[i].ToJson());
      w.Png("results/matrices/heatmap_" + Indexed(i, record.matrices[i].class_name) + ".png",
            RenderHeatmap(record.matrices[i]));
    }
    w.Json("results/matrices/matrices.json", mats);
    w.Csv("results/matrices/auc_folds.csv", MatrixCsv(record.matrices));

    nlohmann::json curves = nlohmann::json::array();
    for (const auto& c : record.curves) curves.push_back(c.ToJson());
    w.Json("results/curves/curves.json", curves);
    w.Csv("results/curves/curves.csv", CurveCsv(record.curves));
    // One figure per (class, strategy), subgroups overlaid.
    std::vector<std::pair<std::string, MaskingStrategy>> groups;
    for (const auto& c : record.curves) {
      const auto key = std::make_pair(c.class_name, c.strategy);
      if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
    }
    for (size_t g = 0; g < groups.size(); ++g) {
      std::vector<DilationCurve> members;
      for (const auto& c : record.curves) {
        if (c.class_name == groups[g].first && c.strategy == groups[g].second) {
          members.push_back(c);
        }
      }
      w.Png("results/curves/curve_" +
                Indexed(g, groups[g].first + "_" + std::string(StrategyName(groups[g].second))) +
                ".png",
            RenderCurves(members));
    }

    nlohmann::json cmps = nlohmann::json::array();
    for (const auto& c : record.comparisons) cmps.push_back(c.ToJson());
    w.Json("results/delong/comparisons.json", cmps);
    w.Csv("results/delong/comparisons.csv", ComparisonCsv(record.comparisons));
    if (record.ood) {
      w.Json("results/delong/ood.json", record.ood->ToJson());
      w.Csv("results/delong/ood.csv", OodCsv(*record.ood));
    }

    nlohmann::json cos = nlohmann::json::array();
    for (const auto& r : record.cosine) cos.push_back(r.ToJson());
    w.Json("results/embeddings/cosine.json", cos);
    w.Csv("results/embeddings/cosine.csv", CosineCsv(record.cosine));
    w.Json("results/embeddings/silhouettes.json", record.silhouettes);
    if (!record.projection.empty()) {
      WriteProjectionCsv(out_dir / "results/embeddings/projection.csv", record.projection);
      w.Png("results/embeddings/projection.png", RenderProjection(record.projection));
    }

    nlohmann::json index = nlohmann::json::array();
    for (size_t i = 0; i < record.attributions.size(); ++i) {
      const AttributionEntry& e = record.attributions[i];
      const std::string png = "results/attributions/map_" +
                              Indexed(i, e.image_id + "_" + std::string(StrategyName(e.strategy))) +
                              ".png";
      nlohmann::json je = e.ToJson();
      je["figure"] = png;
      index.push_back(je);
      w.Png(png, AttributionFigure(e));
    }
    w.Json("results/attributions/index.json", index);

    std::vector<std::string> artifacts = w.Paths();
    if (!record.projection.empty()) {
      artifacts.push_back("results/embeddings/projection.csv");
      std::sort(artifacts.begin(), artifacts.end());
    }
    nlohmann::json summary;
    summary["run_id"] = record.run_id;
    summary["config"] = record.config;
    summary["fingerprints"] = {{"manifest_hash", HexDigest(record.manifest_hash)},
                               {"seed", record.seed}};
    summary["counts"] = {{"matrices", record.matrices.size()},
                         {"curves", record.curves.size()},
                         {"comparisons", record.comparisons.size()},
                         {"ood_rows", record.ood ? record.ood->rows.size() : 0},
                         {"cosine_reports", record.cosine.size()},
                         {"projected_points", record.projection.size()},
                         {"attributions", record.attributions.size()}};
    summary["has_ood"] = record.ood.has_value();
    summary["artifacts"] = artifacts;
    WriteTextFile(out_dir / "summary.json", summary.dump(2) + "\n");
    return artifacts;
  } catch (const fs::filesystem_error& e) {
    Fail(ErrorCode::kIoError, std::string("cannot write run export: ") + e.what());
  }
}

RunRecord LoadRun(const fs::path& out_dir) {
  const fs::path res = out_dir / "results";
  const nlohmann::json summary = ReadJson(out_dir / "summary.json");
  RunRecord r;
  try {
    r.run_id = summary.at("run_id").get<std::string>();
    r.config = summary.at("config");
    r.manifest_hash =
        std::stoull(summary.at("fingerprints").at("manifest_hash").get<std::string>(), nullptr, 16);
    r.seed = summary.at("fingerprints").at("seed").get<uint64_t>();
    for (const auto& j : ReadJson(res / "matrices/matrices.json")) {
      r.matrices.push_back(AucMatrix::FromJson(j));
    }
    for (const auto& j : ReadJson(res / "curves/curves.json")) {
      r.curves.push_back(DilationCurve::FromJson(j));
    }
    for (const auto& j : ReadJson(res / "delong/comparisons.json")) {
      r.comparisons.push_back(StrategyComparison::FromJson(j));
    }
    if (summary.at("has_ood").get<bool>()) {
      r.ood = OodTable::FromJson(ReadJson(res / "delong/ood.json"));
    }
    for (const auto& j : ReadJson(res / "embeddings/cosine.json")) {
      r.cosine.push_back(CosineReport::FromJson(j));
    }
    r.silhouettes =
        ReadJson(res / "embeddings/silhouettes.json").get<std::map<std::string, double>>();
    if (summary.at("counts").at("projected_points").get<size_t>() > 0) {
      r.projection = ReadProjectionCsv(res / "embeddings/projection.csv");
    }
    for (const auto& j : ReadJson(res / "attributions/index.json")) {
      r.attributions.push_back(AttributionEntry::FromJson(j));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("run summary: ") + e.what());
  } catch (const std::logic_error& e) {
    Fail(ErrorCode::kSchemaError, std::string("run summary: ") + e.what());
  }
  return r;
}

}  // namespace maskaudit
