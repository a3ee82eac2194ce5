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

#include "evaluation/pipeline.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <gtest/gtest.h>

#include "core/error.h"
#include "data/synthetic.h"
#include "evaluation/auc.h"
#include "stats_oracles.h"

namespace maskaudit {
namespace {

constexpr int kSize = 32;

struct Fixture {
  SyntheticDataset data;
  InMemoryImageStore store;
  std::vector<std::string> ids;
};

Fixture MakeFixture(double rho, int n, uint64_t seed = 3, bool invert = false) {
  SyntheticConfig c;
  c.n_samples = n;
  c.image_size = kSize;
  c.shortcut_strength = rho;
  c.invert_tag = invert;
  c.seed = seed;
  Fixture f{GenerateSynthetic(c), {}, {}};
  f.store = MakeInMemoryStore(f.data);
  for (const auto& s : f.data.manifest.samples) f.ids.push_back(s.image_id);
  return f;
}

std::shared_ptr<TrainedModel> RandomModel(MaskingStrategy s, int fold, uint64_t seed,
                                          bool constant = false) {
  NetworkSpec spec;
  spec.input_size = kSize;
  spec.widths = {4, 8};
  auto m = std::make_shared<TrainedModel>();
  m->network = CreateNetwork(spec, seed);
  if (constant) {
    for (auto& p : m->network->params()) std::fill(p.value.begin(), p.value.end(), 0.0f);
  }
  m->strategy = s;
  m->fold_index = fold;
  m->normalization = Normalization::ImageNet(1);
  return m;
}

ModelSet RandomModels(std::span<const MaskingStrategy> strategies, int folds) {
  ModelSet set;
  uint64_t seed = 100;
  for (auto s : strategies) {
    for (int f = 0; f < folds; ++f) set.Add(RandomModel(s, f, seed++));
  }
  return set;
}

EvalData MakeEval(const Fixture& f) {
  EvalData d;
  d.manifest = &f.data.manifest;
  d.store = &f.store;
  d.image_ids = f.ids;
  d.options.target_size = kSize;
  return d;
}

// Independent route: a normalizing MaskedView straight into Predict.
double DirectAuc(const Fixture& f, const TrainedModel& m, MaskingStrategy s,
                 MaterializeOptions opt = {}) {
  opt.target_size = kSize;
  opt.normalization = m.normalization;
  const MaskedView view(f.data.manifest, f.store, f.ids, s, opt);
  const std::vector<float> p = Predict(m, view);
  std::vector<double> scores(p.begin(), p.end());
  std::vector<uint8_t> labels;
  for (size_t i = 0; i < view.size(); ++i) labels.push_back(view.sample(i).labels[0]);
  return testing_util::BruteForceAuc(scores, labels);
}

TEST(ModelSetTest, ReportsGaps) {
  ModelSet set;
  set.Add(RandomModel(MaskingStrategy::kFull, 0, 1));
  set.Add(RandomModel(MaskingStrategy::kFull, 1, 2));
  set.Add(RandomModel(MaskingStrategy::kNoRoi, 0, 3));
  const MaskingStrategy rows[] = {MaskingStrategy::kFull, MaskingStrategy::kNoRoi};
  EXPECT_EQ(set.Gaps(rows, 2), std::vector<std::string>{"NO_ROI/fold 1"});
  try {
    set.RequireComplete(rows, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteRun);
    EXPECT_NE(std::string(e.what()).find("NO_ROI/fold 1"), std::string::npos);
  }
  const Fixture f = MakeFixture(0.5, 20);
  EXPECT_THROW(PredictGrid(set, rows, rows, 2, MakeEval(f)), Error);
}

TEST(CrossMaskingTest, CellsMatchDirectEvaluation) {
  const Fixture f = MakeFixture(0.5, 60);
  const int folds = 2;
  const ModelSet models = RandomModels(kAllStrategies, folds);
  EvalData data = MakeEval(f);
  data.max_parallel = 3;
  const PredictionGrid grid = PredictGrid(models, kAllStrategies, kAllStrategies, folds, data);
  const auto matrices = CrossMaskingMatrix(grid);
  ASSERT_EQ(matrices.size(), 1u);
  const AucMatrix& m = matrices[0];
  EXPECT_EQ(m.class_name, "finding");
  ASSERT_EQ(m.cells.size(), 5u);
  for (auto r : kAllStrategies) {
    for (auto c : kAllStrategies) {
      const AucCell& cell = m.cell(r, c);
      ASSERT_EQ(cell.fold_aucs.size(), 2u);
      for (int fold = 0; fold < folds; ++fold) {
        EXPECT_EQ(cell.fold_aucs[fold], DirectAuc(f, *models.Find(r, fold), c));
      }
      const double a = cell.fold_aucs[0], b = cell.fold_aucs[1];
      EXPECT_DOUBLE_EQ(cell.mean, (a + b) / 2);
      EXPECT_DOUBLE_EQ(cell.std, std::fabs(a - b) / 2);
    }
  }
  // Serial evaluation gives the same grid.
  data.max_parallel = 1;
  EXPECT_EQ(CrossMaskingMatrix(PredictGrid(models, kAllStrategies, kAllStrategies,
                                           folds, data)),
            matrices);
}

TEST(CrossMaskingTest, MatrixJsonRoundTripAndValidation) {
  AucMatrix m;
  m.class_name = "x";
  m.train_strategies = {MaskingStrategy::kFull, MaskingStrategy::kNoRoi};
  m.eval_strategies = {MaskingStrategy::kOnlyRoi};
  m.cells = {{{0.75, 0.125, {0.625, 0.875}}}, {{0.5, 0.0, {0.5, 0.5}}}};
  EXPECT_EQ(AucMatrix::FromJson(m.ToJson()), m);
  EXPECT_THROW(m.cell(MaskingStrategy::kFull, MaskingStrategy::kFull), Error);

  AucMatrix nan = m;
  nan.cells[0][0].mean = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(nan.Validate(), Error);
  AucMatrix ragged = m;
  ragged.cells.pop_back();
  try {
    ragged.Validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIncompleteRun);
  }
  const CsvTable csv = MatrixCsv({m});
  EXPECT_EQ(csv.rows.size(), 4u);
  EXPECT_EQ(csv.rows[1][3], "1");
}

TEST(CompareStrategiesTest, PairsAndIdenticalModels) {
  const Fixture f = MakeFixture(0.5, 60);
  const MaskingStrategy rows[] = {MaskingStrategy::kFull, MaskingStrategy::kNoRoi,
                                  MaskingStrategy::kOnlyRoi};
  const MaskingStrategy cols[] = {MaskingStrategy::kFull, MaskingStrategy::kNoRoi};
  const int folds = 3;
  // Same weights under two strategy names.
  ModelSet models;
  for (int fold = 0; fold < folds; ++fold) {
    models.Add(RandomModel(MaskingStrategy::kFull, fold, 7 + fold));
    models.Add(RandomModel(MaskingStrategy::kNoRoi, fold, 7 + fold));
    models.Add(RandomModel(MaskingStrategy::kOnlyRoi, fold, 50 + fold));
  }
  const PredictionGrid grid = PredictGrid(models, rows, cols, folds, MakeEval(f));
  const auto cmp = CompareStrategies(grid);
  ASSERT_EQ(cmp.size(), 3u * 2u);
  const StrategyComparison& same = cmp[0];
  EXPECT_EQ(same.strategy_a, MaskingStrategy::kFull);
  EXPECT_EQ(same.strategy_b, MaskingStrategy::kNoRoi);
  for (const auto& fd : same.folds) {
    EXPECT_EQ(fd.result.z, 0.0);
    EXPECT_EQ(fd.result.p_value, 1.0);
  }
  EXPECT_FALSE(same.significant);
  EXPECT_EQ(ComparisonCsv(cmp).rows.size(), 6u * folds);
}

TEST(SafeDelongTest, DegenerateVarianceBecomesPZero) {
  // Perfect versus constant scores: both component variances vanish.
  const std::vector<uint8_t> y = {0, 0, 0, 1, 1, 1};
  const std::vector<double> a = {0.1, 0.2, 0.3, 0.7, 0.8, 0.9};
  const std::vector<double> b(6, 0.5);
  const FoldDelong d = SafeDelong(a, b, y);
  EXPECT_TRUE(d.degenerate);
  EXPECT_EQ(d.result.p_value, 0.0);
  EXPECT_EQ(d.result.auc_a, 1.0);
  EXPECT_EQ(d.result.auc_b, 0.5);
}

TEST(DilationSweepTest, EndpointsMatchMatrixAndTieConvention) {
  const Fixture f = MakeFixture(0.5, 60);
  const MaskingStrategy rows[] = {MaskingStrategy::kFull};
  const MaskingStrategy cols[] = {MaskingStrategy::kNoRoi, MaskingStrategy::kOnlyRoi};
  const ModelSet models = RandomModels(rows, 2);
  const EvalData data = MakeEval(f);
  const auto matrix = CrossMaskingMatrix(PredictGrid(models, rows, cols, 2, data))[0];
  const TrainedModel* fold_models[] = {models.Find(MaskingStrategy::kFull, 0),
                                       models.Find(MaskingStrategy::kFull, 1)};
  // 32 * sqrt(2) < 46, so factor 46 covers every pixel from any ROI pixel.
  const int factors[] = {0, 3, 46};
  const auto no_roi = DilationSweep(fold_models, data, MaskingStrategy::kNoRoi,
                                    factors, DilationSubgroup::kAll);
  ASSERT_EQ(no_roi.size(), 1u);
  EXPECT_EQ(no_roi[0].fold_aucs[0],
            matrix.cell(MaskingStrategy::kFull, MaskingStrategy::kNoRoi).fold_aucs);
  EXPECT_EQ(no_roi[0].auc_mean[0],
            matrix.cell(MaskingStrategy::kFull, MaskingStrategy::kNoRoi).mean);
  EXPECT_EQ(no_roi[0].auc_mean[2], 0.5);
  EXPECT_EQ(no_roi[0].auc_std[2], 0.0);

  const auto only = DilationSweep(fold_models, data, MaskingStrategy::kOnlyRoi,
                                  factors, DilationSubgroup::kPositivesOnly);
  EXPECT_EQ(only[0].fold_aucs[0],
            matrix.cell(MaskingStrategy::kFull, MaskingStrategy::kOnlyRoi).fold_aucs);
  // Independent check of one dilated point.
  MaterializeOptions opt;
  opt.dilation_factor = 3;
  opt.subgroup = DilationSubgroup::kPositivesOnly;
  EXPECT_EQ(only[0].fold_aucs[1][1],
            DirectAuc(f, *fold_models[1], MaskingStrategy::kOnlyRoi, opt));
  EXPECT_EQ(DilationCurve::FromJson(only[0].ToJson()), only[0]);
  EXPECT_EQ(CurveCsv(only).rows.size(), 3u * 2u);
}

TEST(DilationSweepTest, Rejections) {
  const Fixture f = MakeFixture(0.5, 20);
  const MaskingStrategy rows[] = {MaskingStrategy::kFull};
  const ModelSet models = RandomModels(rows, 1);
  const TrainedModel* m[] = {models.Find(MaskingStrategy::kFull, 0)};
  const int unsorted[] = {5, 0};
  const int ok[] = {0};
  EXPECT_THROW(DilationSweep(m, MakeEval(f), MaskingStrategy::kNoRoi, unsorted,
                             DilationSubgroup::kAll),
               Error);
  EXPECT_THROW(DilationSweep(m, MakeEval(f), MaskingStrategy::kFull, ok,
                             DilationSubgroup::kAll),
               Error);
  DilationCurve c;
  c.factors = {0, 0};
  c.auc_mean = c.auc_std = {0.5, 0.5};
  c.fold_aucs = {{0.5}, {0.5}};
  EXPECT_THROW(c.Validate(), Error);
}

TEST(OodTest, SameDataMatchesFullColumnAndClassCheck) {
  const Fixture f = MakeFixture(0.5, 60);
  const MaskingStrategy rows[] = {MaskingStrategy::kFull, MaskingStrategy::kNoRoi};
  const MaskingStrategy full[] = {MaskingStrategy::kFull};
  const ModelSet models = RandomModels(rows, 3);
  const EvalData data = MakeEval(f);
  const OodTable ood =
      OodEvaluate(models, rows, 3, f.data.manifest.class_names, data);
  const auto matrix = CrossMaskingMatrix(PredictGrid(models, rows, full, 3, data))[0];
  for (auto s : rows) {
    EXPECT_EQ(ood.row("finding", s).fold_aucs,
              matrix.cell(s, MaskingStrategy::kFull).fold_aucs);
  }
  EXPECT_EQ(OodCsv(ood).rows.size(), 6u);
  try {
    OodEvaluate(models, rows, 3, {"other"}, data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaError);
  }
}

TEST(OodTest, StarsSignificantWinnerAndShortcutFailsOnInvertedTag) {
  const Fixture train = MakeFixture(1.0, 400, 11);
  TrainConfig cfg = TrainConfig::DeskDefaults();
  cfg.input_size = kSize;
  cfg.max_epochs = 12;
  MaterializeOptions opt;
  opt.target_size = kSize;
  std::vector<std::string> tr, va;
  for (size_t i = 0; i < train.ids.size(); ++i) (i % 5 ? tr : va).push_back(train.ids[i]);
  const MaskingStrategy rows[] = {MaskingStrategy::kNoRoi, MaskingStrategy::kOnlyRoi};
  ModelSet models;
  for (int fold = 0; fold < 3; ++fold) {
    cfg.seed = fold;
    const MaskedView t(train.data.manifest, train.store, tr, MaskingStrategy::kNoRoi, opt);
    const MaskedView v(train.data.manifest, train.store, va, MaskingStrategy::kNoRoi, opt);
    auto m = std::make_shared<TrainedModel>(Train(cfg, t, v, fold));
    models.Add(m);
    models.Add(RandomModel(MaskingStrategy::kOnlyRoi, fold, 900, /*constant=*/true));
  }
  // In distribution the shortcut model wins clearly.
  const Fixture same = MakeFixture(1.0, 200, 12);
  const OodTable in = OodEvaluate(models, rows, 3, same.data.manifest.class_names,
                                  MakeEval(same));
  EXPECT_GE(in.row("finding", MaskingStrategy::kNoRoi).mean, 0.9);
  EXPECT_TRUE(in.row("finding", MaskingStrategy::kNoRoi).starred);
  EXPECT_FALSE(in.row("finding", MaskingStrategy::kOnlyRoi).starred);
  // With the tag convention inverted it collapses.
  const Fixture inverted = MakeFixture(1.0, 200, 13, /*invert=*/true);
  const OodTable out = OodEvaluate(models, rows, 3,
                                   inverted.data.manifest.class_names,
                                   MakeEval(inverted));
  EXPECT_LE(out.row("finding", MaskingStrategy::kNoRoi).mean, 0.55);
}

}  // namespace
}  // namespace maskaudit
