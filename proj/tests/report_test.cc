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

#include <cmath>
#include <limits>
#include <set>

#include <gtest/gtest.h>

#include "core/csv.h"
#include "core/error.h"
#include "core/file_util.h"
#include "report/canvas.h"
#include "report/figures.h"
#include "test_util.h"

namespace maskaudit {
namespace {

namespace fs = std::filesystem;

Rgb PixelAt(const RgbRaster& r, int x, int y) {
  const size_t i = (static_cast<size_t>(y) * r.width + x) * 3;
  return {r.pixels[i], r.pixels[i + 1], r.pixels[i + 2]};
}

AucMatrix IdentityMatrix() {
  AucMatrix m;
  m.class_name = "pneumothorax";
  m.train_strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
  m.eval_strategies = m.train_strategies;
  for (int r = 0; r < 5; ++r) {
    m.cells.emplace_back();
    for (int c = 0; c < 5; ++c) {
      const double v = r == c ? 1.0 : 0.5;
      m.cells.back().push_back({v, 0.0, {v, v, v}});
    }
  }
  return m;
}

DilationCurve Curve(DilationSubgroup g, double mean, double sd) {
  DilationCurve c;
  c.class_name = "cardiomegaly";
  c.strategy = MaskingStrategy::kOnlyRoi;
  c.subgroup = g;
  c.factors.assign(kDefaultDilationFactors.begin(), kDefaultDilationFactors.end());
  for (size_t i = 0; i < c.factors.size(); ++i) {
    c.auc_mean.push_back(mean);
    c.auc_std.push_back(sd);
    c.fold_aucs.push_back({mean - sd, mean + sd});
  }
  return c;
}

RunRecord SampleRecord() {
  RunRecord r;
  r.run_id = "run-7";
  r.config = {{"seed", 3}, {"lr", 0.1 + 0.2}, {"strategies", {"FULL", "NO_ROI"}}};
  r.manifest_hash = 0xfedcba9876543210ull;
  r.seed = 3;
  AucMatrix m = IdentityMatrix();
  m.cells[1][2] = {2.0 / 3.0, 1.0 / 7.0, {0.1 + 0.2, 1.0 / 3.0, 0.9999999999999999}};
  r.matrices = {m};
  r.curves = {Curve(DilationSubgroup::kPositivesOnly, 0.7, 0.05),
              Curve(DilationSubgroup::kNegativesOnly, 1.0 / 3.0, 1e-17)};
  StrategyComparison cmp;
  cmp.class_name = "pneumothorax";
  cmp.eval_strategy = MaskingStrategy::kFull;
  cmp.strategy_a = MaskingStrategy::kFull;
  cmp.strategy_b = MaskingStrategy::kNoRoi;
  cmp.folds = {{{0.9, 0.6, 1e-3, 9.486832980505138, 2.2e-21}, false},
               {{1.0, 0.5, 0.0, 0.0, 0.0}, true}};
  cmp.significant = false;
  r.comparisons = {cmp};
  OodTable ood;
  ood.rows = {{"pneumothorax", MaskingStrategy::kFull, {0.61, 0.62}, 0.615, 0.005, true}};
  r.ood = ood;
  CosineReport cos;
  cos.strategy = MaskingStrategy::kNoRoi;
  cos.all = {0.9123456789012345, 0.01, 40};
  cos.class_names = {"z_last", "a_first"};
  cos.per_class = {{0.5, 0.1, 10}, {0.25, 0.2, 30}};
  cos.excluded_zero_norm = 1;
  r.cosine = {cos};
  r.projection = {{"img,1", MaskingStrategy::kFull, -1.25, 3.0e-5},
                  {"img2", MaskingStrategy::kOnlyRoi, 12.5, -7.0 / 3.0}};
  r.silhouettes = {{"NO_ROI", 0.153}, {"ONLY_ROI", 0.584}};
  AttributionEntry e;
  e.image_id = "img2";
  e.strategy = MaskingStrategy::kNoRoi;
  e.fold = 1;
  e.class_name = "pneumothorax";
  e.height = 16;
  e.width = 16;
  e.segments = 4;
  e.map = {{0.5, -0.25, 0.0, 1.0 / 9.0}, 0.1, 0.461111111111111, 0, 1000, true};
  r.attributions = {e};
  return r;
}

std::set<std::string> FilesUnder(const fs::path& root) {
  std::set<std::string> out;
  for (const auto& p : fs::recursive_directory_iterator(root)) {
    if (p.is_regular_file()) out.insert(fs::relative(p.path(), root).generic_string());
  }
  return out;
}

TEST(CanvasTest, PrimitivesAndText) {
  Canvas c(40, 20);
  c.Line(2, 3, 12, 3, kBlack, 1);
  for (int x = 2; x <= 12; ++x) EXPECT_EQ(c.Get(x, 3), kBlack);
  EXPECT_EQ(c.Get(13, 3), kWhite);
  c.Blend(0, 0, kBlack, 0.5);
  EXPECT_EQ(c.Get(0, 0), (Rgb{128, 128, 128}));
  c.Set(-1, 100, kBlack);  // clipped
  Canvas t(40, 20);
  t.Text(1, 1, "1", kBlack);
  // The "1" glyph has a solid bottom bar of three pixels.
  EXPECT_EQ(t.Get(2, 7), kBlack);
  EXPECT_EQ(t.Get(4, 7), kBlack);
  EXPECT_EQ(t.Get(1, 7), kWhite);
  EXPECT_EQ(Canvas::TextWidth("ab", 2), 22);
  EXPECT_EQ(Colormap(-3.0), Colormap(0.0));
  EXPECT_EQ(Colormap(7.0), Colormap(1.0));
  EXPECT_GT(Luminance(Colormap(1.0)), Luminance(Colormap(0.0)));
}

TEST(HeatmapTest, IdentityPatternUsesTopColourOnDiagonal) {
  const RgbRaster r = RenderHeatmap(IdentityMatrix());
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const CellBox b = HeatmapCell(i, j);
      EXPECT_EQ(PixelAt(r, b.x + 3, b.y + 3), Colormap(i == j ? 1.0 : 0.0)) << i << "," << j;
    }
  }
  // Explicit range remaps the same cells.
  const RgbRaster wide = RenderHeatmap(IdentityMatrix(), ColorRange{0.0, 1.0});
  const CellBox off = HeatmapCell(0, 1);
  EXPECT_EQ(PixelAt(wide, off.x + 3, off.y + 3), Colormap(0.5));
  EXPECT_THROW(RenderHeatmap(IdentityMatrix(), ColorRange{1.0, 1.0}), Error);
}

TEST(HeatmapTest, DeterministicBytes) {
  const auto a = EncodePngRgb(RenderHeatmap(IdentityMatrix()));
  const auto b = EncodePngRgb(RenderHeatmap(IdentityMatrix()));
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.empty());
}

TEST(HeatmapTest, RejectsNanAndIncomplete) {
  AucMatrix nan = IdentityMatrix();
  nan.cells[2][3].mean = std::numeric_limits<double>::quiet_NaN();
  try {
    RenderHeatmap(nan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  AucMatrix ragged = IdentityMatrix();
  ragged.cells[4].pop_back();
  try {
    RenderHeatmap(ragged);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteRun);
  }
}

TEST(CurveTest, ConstantCurveIsFlat) {
  const DilationCurve c = Curve(DilationSubgroup::kPositivesOnly, 0.8, 0.05);
  const RgbRaster r = RenderCurves(std::span(&c, 1));
  const PlotArea a = CurvePlotArea();
  const Rgb line = SubgroupColor(DilationSubgroup::kPositivesOnly);
  std::set<int> rows_first;
  int columns = 0;
  for (int x = a.x0 + 1; x < a.x1 - 1; ++x) {
    std::set<int> rows;
    for (int y = a.y0 + 1; y < a.y1 - 1; ++y) {
      if (PixelAt(r, x, y) == line) rows.insert(y);
    }
    if (rows.empty()) continue;
    if (columns++ == 0) rows_first = rows;
    EXPECT_EQ(rows, rows_first) << "column " << x;
  }
  EXPECT_GT(columns, (a.x1 - a.x0) / 2);
  // The band is tinted above and below the line.
  const int mid = (a.x0 + a.x1) / 2;
  EXPECT_NE(PixelAt(r, mid, *rows_first.begin() - 5), kWhite);
  EXPECT_NE(PixelAt(r, mid, *rows_first.rbegin() + 5), kWhite);
}

TEST(CurveTest, DeterministicAndSubgroupColours) {
  const std::vector<DilationCurve> cs = {Curve(DilationSubgroup::kPositivesOnly, 0.9, 0.02),
                                         Curve(DilationSubgroup::kNegativesOnly, 0.6, 0.04)};
  const RgbRaster r = RenderCurves(cs);
  EXPECT_EQ(EncodePngRgb(r), EncodePngRgb(RenderCurves(cs)));
  bool orange = false, blue = false;
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      orange |= PixelAt(r, x, y) == SubgroupColor(DilationSubgroup::kPositivesOnly);
      blue |= PixelAt(r, x, y) == SubgroupColor(DilationSubgroup::kNegativesOnly);
    }
  }
  EXPECT_TRUE(orange);
  EXPECT_TRUE(blue);
}

TEST(CurveTest, Rejections) {
  EXPECT_THROW(RenderCurves({}), Error);
  DilationCurve bad = Curve(DilationSubgroup::kAll, 0.7, 0.1);
  bad.auc_std.pop_back();
  try {
    RenderCurves(std::span(&bad, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
  DilationCurve empty = Curve(DilationSubgroup::kAll, 0.7, 0.1);
  empty.factors.clear();
  empty.auc_mean.clear();
  empty.auc_std.clear();
  empty.fold_aucs.clear();
  EXPECT_THROW(RenderCurves(std::span(&empty, 1)), Error);
  // Per-curve grids are merged onto one axis.
  DilationCurve sparse = Curve(DilationSubgroup::kAll, 0.7, 0.1);
  sparse.factors = {0, 7};
  sparse.auc_mean.resize(2);
  sparse.auc_std.resize(2);
  sparse.fold_aucs.resize(2);
  const std::vector<DilationCurve> mixed = {Curve(DilationSubgroup::kAll, 0.6, 0.0), sparse};
  EXPECT_NO_THROW(RenderCurves(mixed));
}

TEST(ExportTest, RoundTripReloadEqualsRecord) {
  testing_util::TempDir dir("export");
  const RunRecord rec = SampleRecord();
  ExportRun(rec, dir.path());
  const RunRecord back = LoadRun(dir.path());
  EXPECT_EQ(back.run_id, rec.run_id);
  EXPECT_EQ(back.config, rec.config);
  EXPECT_EQ(back.matrices, rec.matrices);
  EXPECT_EQ(back.curves, rec.curves);
  EXPECT_EQ(back.comparisons, rec.comparisons);
  EXPECT_EQ(back.ood, rec.ood);
  EXPECT_EQ(back.cosine, rec.cosine);
  EXPECT_EQ(back.projection, rec.projection);
  EXPECT_EQ(back.attributions, rec.attributions);
  EXPECT_TRUE(back == rec);
}

TEST(ExportTest, CsvNumbersReparseExactly) {
  testing_util::TempDir dir("csvnum");
  const RunRecord rec = SampleRecord();
  ExportRun(rec, dir.path());
  const CsvTable t = ReadCsvFile(dir.path() / "results/matrices/auc_folds.csv");
  const size_t auc = t.RequireColumn("auc");
  std::vector<double> want;
  std::vector<double> got;
  for (const auto& row : t.rows) {
    if (row[1] == "NO_ROI" && row[2] == "NO_ROI_BB") got.push_back(ParseDouble(row[auc]));
  }
  want = rec.matrices[0].cells[1][2].fold_aucs;
  EXPECT_EQ(got, want);
}

TEST(ExportTest, IdempotentAndSummaryListsEveryArtifact) {
  testing_util::TempDir dir("idem");
  const RunRecord rec = SampleRecord();
  const auto paths = ExportRun(rec, dir.path());
  std::map<std::string, std::vector<uint8_t>> first;
  for (const auto& f : FilesUnder(dir.path())) first[f] = ReadFileBytes(dir.path() / f);
  EXPECT_EQ(ExportRun(rec, dir.path()), paths);
  for (const auto& [f, bytes] : first) EXPECT_EQ(ReadFileBytes(dir.path() / f), bytes) << f;
  EXPECT_EQ(FilesUnder(dir.path()).size(), first.size());

  const auto summary = nlohmann::json::parse(ReadTextFile(dir.path() / "summary.json"));
  std::set<std::string> listed;
  for (const auto& p : summary["artifacts"]) listed.insert(p.get<std::string>());
  std::set<std::string> on_disk = FilesUnder(dir.path());
  on_disk.erase("summary.json");
  EXPECT_EQ(listed, on_disk);
  for (const char* sub : {"matrices", "curves", "delong", "embeddings", "attributions"}) {
    EXPECT_TRUE(fs::is_directory(dir.path() / "results" / sub)) << sub;
  }
  EXPECT_EQ(summary["fingerprints"]["manifest_hash"], "fedcba9876543210");
}

TEST(ExportTest, UnwritableDirectoryAndIncompleteRecord) {
  testing_util::TempDir dir("blocked");
  WriteTextFile(dir.path() / "file", "x");
  try {
    ExportRun(SampleRecord(), dir.path() / "file" / "run");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
  RunRecord anon = SampleRecord();
  anon.run_id.clear();
  EXPECT_THROW(ExportRun(anon, dir.path() / "anon"), Error);
}

}  // namespace
}  // namespace maskaudit
