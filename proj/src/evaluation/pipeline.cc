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
#include <set>

#include "core/error.h"
#include "core/parallel.h"
#include "evaluation/auc.h"

namespace maskaudit {
namespace {

size_t AxisIndex(const std::vector<MaskingStrategy>& axis, MaskingStrategy s) {
  const auto it = std::find(axis.begin(), axis.end(), s);
  if (it == axis.end()) {
    Fail(ErrorCode::kNotFound,
         "strategy " + std::string(StrategyName(s)) + " is not on this axis");
  }
  return it - axis.begin();
}

nlohmann::json StrategyList(const std::vector<MaskingStrategy>& v) {
  nlohmann::json j = nlohmann::json::array();
  for (auto s : v) j.push_back(std::string(StrategyName(s)));
  return j;
}

std::vector<MaskingStrategy> ParseStrategyList(const nlohmann::json& j) {
  std::vector<MaskingStrategy> out;
  for (const auto& s : j) out.push_back(ParseStrategy(s.get<std::string>()));
  return out;
}

void CheckUnit(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    Fail(ErrorCode::kInvalidArgument, what + " is outside [0, 1]");
  }
}

AucCell MakeCell(std::vector<double> fold_aucs) {
  AucCell c;
  const MeanStd ms = Summarize(fold_aucs);
  c.mean = ms.mean;
  c.std = ms.std;
  c.fold_aucs = std::move(fold_aucs);
  return c;
}

std::string Fmt(double v) { return FormatDouble(v); }

// Raw (unnormalized) images of one evaluation variant, with labels.
struct RawSet {
  std::vector<std::string> ids;
  std::vector<Image> images;
  std::vector<uint8_t> labels;  // n x k
};

RawSet Materialize(const EvalData& data, MaskingStrategy strategy,
                   const MaterializeOptions& options) {
  if (data.manifest == nullptr || data.store == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "evaluation data needs a manifest and a store");
  }
  MaterializeOptions opt = options;
  opt.normalize = false;
  const MaskedView view(*data.manifest, *data.store, data.image_ids, strategy, opt);
  RawSet out;
  out.images.resize(view.size());
  ParallelFor(view.size(), data.max_parallel,
              [&](size_t i) { out.images[i] = view.GetRaw(i); });
  for (size_t i = 0; i < view.size(); ++i) {
    out.ids.push_back(view.sample(i).image_id);
    const auto& l = view.sample(i).labels;
    out.labels.insert(out.labels.end(), l.begin(), l.end());
  }
  return out;
}

// Probabilities of each model on `raw`, normalizing once per distinct
// normalization.
std::vector<std::vector<float>> PredictAll(
    const std::vector<const TrainedModel*>& models, const RawSet& raw,
    int max_parallel) {
  std::vector<Normalization> norms;
  std::vector<size_t> norm_of(models.size());
  for (size_t m = 0; m < models.size(); ++m) {
    auto it = std::find(norms.begin(), norms.end(), models[m]->normalization);
    if (it == norms.end()) {
      norms.push_back(models[m]->normalization);
      it = norms.end() - 1;
    }
    norm_of[m] = it - norms.begin();
  }
  std::vector<std::vector<Image>> normalized(norms.size());
  for (size_t k = 0; k < norms.size(); ++k) {
    normalized[k].resize(raw.images.size());
    ParallelFor(raw.images.size(), max_parallel, [&](size_t i) {
      normalized[k][i] = Normalize(raw.images[i], norms[k]);
    });
  }
  std::vector<std::vector<float>> out(models.size());
  ParallelFor(models.size(), max_parallel, [&](size_t m) {
    out[m] = Predict(*models[m], normalized[norm_of[m]]);
  });
  return out;
}

std::vector<double> Column(const std::vector<float>& scores, size_t k, size_t c) {
  std::vector<double> v;
  v.reserve(scores.size() / k);
  for (size_t i = c; i < scores.size(); i += k) v.push_back(scores[i]);
  return v;
}

std::vector<uint8_t> Column(const std::vector<uint8_t>& labels, size_t k, size_t c) {
  std::vector<uint8_t> v;
  v.reserve(labels.size() / k);
  for (size_t i = c; i < labels.size(); i += k) v.push_back(labels[i]);
  return v;
}

}  // namespace

const AucCell& AucMatrix::cell(MaskingStrategy train, MaskingStrategy eval) const {
  return cells.at(AxisIndex(train_strategies, train)).at(AxisIndex(eval_strategies, eval));
}

void AucMatrix::Validate() const {
  if (cells.size() != train_strategies.size()) {
    Fail(ErrorCode::kIncompleteRun, "matrix '" + class_name + "' is missing rows");
  }
  for (size_t r = 0; r < cells.size(); ++r) {
    if (cells[r].size() != eval_strategies.size()) {
      Fail(ErrorCode::kIncompleteRun,
           "matrix '" + class_name + "' row " +
               std::string(StrategyName(train_strategies[r])) + " is incomplete");
    }
    for (size_t c = 0; c < cells[r].size(); ++c) {
      const AucCell& cell = cells[r][c];
      const std::string where = "matrix '" + class_name + "' cell (" +
                                std::string(StrategyName(train_strategies[r])) +
                                ", " + std::string(StrategyName(eval_strategies[c])) + ")";
      CheckUnit(cell.mean, where);
      if (!(cell.std >= 0.0)) Fail(ErrorCode::kInvalidArgument, where + " has a bad std");
      for (double v : cell.fold_aucs) CheckUnit(v, where);
    }
  }
}

nlohmann::json AucMatrix::ToJson() const {
  nlohmann::json j;
  j["class_name"] = class_name;
  j["train_strategies"] = StrategyList(train_strategies);
  j["eval_strategies"] = StrategyList(eval_strategies);
  j["cells"] = nlohmann::json::array();
  for (const auto& row : cells) {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& c : row) {
      jr.push_back({{"mean", c.mean}, {"std", c.std}, {"fold_aucs", c.fold_aucs}});
    }
    j["cells"].push_back(jr);
  }
  return j;
}

AucMatrix AucMatrix::FromJson(const nlohmann::json& j) {
  AucMatrix m;
  try {
    m.class_name = j.at("class_name").get<std::string>();
    m.train_strategies = ParseStrategyList(j.at("train_strategies"));
    m.eval_strategies = ParseStrategyList(j.at("eval_strategies"));
    for (const auto& jr : j.at("cells")) {
      std::vector<AucCell> row;
      for (const auto& jc : jr) {
        row.push_back({jc.at("mean").get<double>(), jc.at("std").get<double>(),
                       jc.at("fold_aucs").get<std::vector<double>>()});
      }
      m.cells.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("AUC matrix: ") + e.what());
  }
  m.Validate();
  return m;
}

void ModelSet::Add(std::shared_ptr<const TrainedModel> model) {
  const auto key = std::make_pair(StrategyIndex(model->strategy), model->fold_index);
  models_[key] = std::move(model);
}

const TrainedModel* ModelSet::Find(MaskingStrategy strategy, int fold) const {
  const auto it = models_.find({StrategyIndex(strategy), fold});
  return it == models_.end() ? nullptr : it->second.get();
}

std::vector<std::string> ModelSet::Gaps(std::span<const MaskingStrategy> strategies,
                                        int folds) const {
  std::vector<std::string> gaps;
  for (auto s : strategies) {
    for (int f = 0; f < folds; ++f) {
      if (Find(s, f) == nullptr) {
        gaps.push_back(std::string(StrategyName(s)) + "/fold " + std::to_string(f));
      }
    }
  }
  return gaps;
}

void ModelSet::RequireComplete(std::span<const MaskingStrategy> strategies,
                               int folds) const {
  const auto gaps = Gaps(strategies, folds);
  if (gaps.empty()) return;
  std::string msg = "missing models:";
  for (const auto& g : gaps) msg += " " + g;
  Fail(ErrorCode::kIncompleteRun, msg);
}

std::vector<double> PredictionGrid::ClassScores(size_t row, int fold, size_t col,
                                                size_t cls) const {
  const size_t idx = (row * folds + fold) * eval_strategies.size() + col;
  return Column(scores.at(idx), num_classes(), cls);
}

std::vector<uint8_t> PredictionGrid::ClassLabels(size_t cls) const {
  return Column(labels, num_classes(), cls);
}

PredictionGrid PredictGrid(const ModelSet& models,
                           std::span<const MaskingStrategy> train_strategies,
                           std::span<const MaskingStrategy> eval_strategies,
                           int folds, const EvalData& data) {
  if (folds < 1) Fail(ErrorCode::kInvalidArgument, "need at least one fold");
  models.RequireComplete(train_strategies, folds);
  PredictionGrid grid;
  grid.class_names = data.manifest->class_names;
  grid.train_strategies.assign(train_strategies.begin(), train_strategies.end());
  grid.eval_strategies.assign(eval_strategies.begin(), eval_strategies.end());
  grid.folds = folds;
  std::vector<const TrainedModel*> ordered;
  for (auto s : train_strategies) {
    for (int f = 0; f < folds; ++f) ordered.push_back(models.Find(s, f));
  }
  const size_t cols = eval_strategies.size();
  grid.scores.resize(ordered.size() * cols);
  for (size_t c = 0; c < cols; ++c) {
    const RawSet raw = Materialize(data, eval_strategies[c], data.options);
    if (c == 0) {
      grid.image_ids = raw.ids;
      grid.labels = raw.labels;
    }
    auto preds = PredictAll(ordered, raw, data.max_parallel);
    for (size_t m = 0; m < ordered.size(); ++m) {
      if (preds[m].size() != raw.ids.size() * grid.num_classes()) {
        Fail(ErrorCode::kModelOutputError,
             "model output does not match the number of classes");
      }
      grid.scores[m * cols + c] = std::move(preds[m]);
    }
  }
  return grid;
}

std::vector<AucMatrix> CrossMaskingMatrix(const PredictionGrid& grid) {
  std::vector<AucMatrix> out;
  for (size_t k = 0; k < grid.num_classes(); ++k) {
    AucMatrix m;
    m.class_name = grid.class_names[k];
    m.train_strategies = grid.train_strategies;
    m.eval_strategies = grid.eval_strategies;
    const auto labels = grid.ClassLabels(k);
    for (size_t r = 0; r < grid.train_strategies.size(); ++r) {
      std::vector<AucCell> row;
      for (size_t c = 0; c < grid.eval_strategies.size(); ++c) {
        std::vector<double> aucs;
        for (int f = 0; f < grid.folds; ++f) {
          aucs.push_back(Auc(grid.ClassScores(r, f, c, k), labels));
        }
        row.push_back(MakeCell(std::move(aucs)));
      }
      m.cells.push_back(std::move(row));
    }
    m.Validate();
    out.push_back(std::move(m));
  }
  return out;
}

FoldDelong SafeDelong(std::span<const double> a, std::span<const double> b,
                      std::span<const uint8_t> labels) {
  FoldDelong out;
  try {
    out.result = DelongTest(a, b, labels);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNumericalDegeneracy) throw;
    out.result.auc_a = Auc(a, labels);
    out.result.auc_b = Auc(b, labels);
    out.result.variance_diff = 0.0;
    out.result.z = 0.0;
    out.result.p_value = 0.0;  // no sampling spread: the gap is certain
    out.degenerate = true;
  }
  return out;
}

nlohmann::json StrategyComparison::ToJson() const {
  nlohmann::json j;
  j["class_name"] = class_name;
  j["eval_strategy"] = std::string(StrategyName(eval_strategy));
  j["strategy_a"] = std::string(StrategyName(strategy_a));
  j["strategy_b"] = std::string(StrategyName(strategy_b));
  j["significant"] = significant;
  j["folds"] = nlohmann::json::array();
  for (const auto& f : folds) {
    j["folds"].push_back({{"auc_a", f.result.auc_a},
                          {"auc_b", f.result.auc_b},
                          {"variance_diff", f.result.variance_diff},
                          {"z", f.result.z},
                          {"p_value", f.result.p_value},
                          {"degenerate", f.degenerate}});
  }
  return j;
}

StrategyComparison StrategyComparison::FromJson(const nlohmann::json& j) {
  StrategyComparison c;
  try {
    c.class_name = j.at("class_name").get<std::string>();
    c.eval_strategy = ParseStrategy(j.at("eval_strategy").get<std::string>());
    c.strategy_a = ParseStrategy(j.at("strategy_a").get<std::string>());
    c.strategy_b = ParseStrategy(j.at("strategy_b").get<std::string>());
    c.significant = j.at("significant").get<bool>();
    for (const auto& jf : j.at("folds")) {
      FoldDelong f;
      f.result.auc_a = jf.at("auc_a").get<double>();
      f.result.auc_b = jf.at("auc_b").get<double>();
      f.result.variance_diff = jf.at("variance_diff").get<double>();
      f.result.z = jf.at("z").get<double>();
      f.result.p_value = jf.at("p_value").get<double>();
      f.degenerate = jf.at("degenerate").get<bool>();
      c.folds.push_back(f);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("strategy comparison: ") + e.what());
  }
  return c;
}

std::vector<StrategyComparison> CompareStrategies(const PredictionGrid& grid,
                                                  double alpha, int min_folds) {
  std::vector<StrategyComparison> out;
  const size_t rows = grid.train_strategies.size();
  for (size_t k = 0; k < grid.num_classes(); ++k) {
    const auto labels = grid.ClassLabels(k);
    for (size_t c = 0; c < grid.eval_strategies.size(); ++c) {
      for (size_t a = 0; a < rows; ++a) {
        for (size_t b = a + 1; b < rows; ++b) {
          StrategyComparison cmp;
          cmp.class_name = grid.class_names[k];
          cmp.eval_strategy = grid.eval_strategies[c];
          cmp.strategy_a = grid.train_strategies[a];
          cmp.strategy_b = grid.train_strategies[b];
          std::vector<double> p;
          for (int f = 0; f < grid.folds; ++f) {
            cmp.folds.push_back(SafeDelong(grid.ClassScores(a, f, c, k),
                                           grid.ClassScores(b, f, c, k), labels));
            p.push_back(cmp.folds.back().result.p_value);
          }
          cmp.significant = static_cast<int>(p.size()) >= min_folds &&
                            SignificantAcrossFolds(p, alpha, min_folds);
          out.push_back(std::move(cmp));
        }
      }
    }
  }
  return out;
}

void DilationCurve::Validate() const {
  if (auc_mean.size() != factors.size() || auc_std.size() != factors.size() ||
      fold_aucs.size() != factors.size()) {
    Fail(ErrorCode::kInvalidArgument, "dilation curve lists differ in length");
  }
  for (size_t i = 0; i < factors.size(); ++i) {
    if (factors[i] < 0 || (i > 0 && factors[i] <= factors[i - 1])) {
      Fail(ErrorCode::kInvalidArgument,
           "dilation factors must be non-negative and strictly increasing");
    }
  }
}

nlohmann::json DilationCurve::ToJson() const {
  return {{"class_name", class_name},
          {"strategy", std::string(StrategyName(strategy))},
          {"subgroup", std::string(SubgroupName(subgroup))},
          {"factors", factors},
          {"auc_mean", auc_mean},
          {"auc_std", auc_std},
          {"fold_aucs", fold_aucs}};
}

DilationCurve DilationCurve::FromJson(const nlohmann::json& j) {
  DilationCurve c;
  try {
    c.class_name = j.at("class_name").get<std::string>();
    c.strategy = ParseStrategy(j.at("strategy").get<std::string>());
    c.subgroup = ParseSubgroup(j.at("subgroup").get<std::string>());
    c.factors = j.at("factors").get<std::vector<int>>();
    c.auc_mean = j.at("auc_mean").get<std::vector<double>>();
    c.auc_std = j.at("auc_std").get<std::vector<double>>();
    c.fold_aucs = j.at("fold_aucs").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("dilation curve: ") + e.what());
  }
  c.Validate();
  return c;
}

std::vector<DilationCurve> DilationSweep(
    std::span<const TrainedModel* const> fold_models, const EvalData& data,
    MaskingStrategy strategy, std::span<const int> factors,
    DilationSubgroup subgroup, int subgroup_class) {
  if (strategy != MaskingStrategy::kNoRoi && strategy != MaskingStrategy::kOnlyRoi) {
    Fail(ErrorCode::kInvalidArgument, "dilation sweeps use NO_ROI or ONLY_ROI");
  }
  if (fold_models.empty()) Fail(ErrorCode::kInvalidArgument, "no models to sweep");
  for (const TrainedModel* m : fold_models) {
    if (m == nullptr) Fail(ErrorCode::kIncompleteRun, "missing fold model in sweep");
  }
  const size_t k = data.manifest->class_names.size();
  std::vector<DilationCurve> curves(k);
  for (size_t c = 0; c < k; ++c) {
    curves[c].class_name = data.manifest->class_names[c];
    curves[c].strategy = strategy;
    curves[c].subgroup = subgroup;
    curves[c].factors.assign(factors.begin(), factors.end());
  }
  DilationCurve probe = curves.empty() ? DilationCurve{} : curves[0];
  probe.auc_mean.assign(factors.size(), 0.0);
  probe.auc_std.assign(factors.size(), 0.0);
  probe.fold_aucs.assign(factors.size(), {});
  probe.Validate();

  const std::vector<const TrainedModel*> models(fold_models.begin(), fold_models.end());
  for (int factor : factors) {
    MaterializeOptions opt = data.options;
    opt.dilation_factor = factor;
    opt.subgroup = subgroup;
    opt.subgroup_class = subgroup_class;
    const RawSet raw = Materialize(data, strategy, opt);
    const auto preds = PredictAll(models, raw, data.max_parallel);
    for (size_t c = 0; c < k; ++c) {
      const auto labels = Column(raw.labels, k, c);
      std::vector<double> aucs;
      for (const auto& p : preds) aucs.push_back(Auc(Column(p, k, c), labels));
      const MeanStd ms = Summarize(aucs);
      curves[c].auc_mean.push_back(ms.mean);
      curves[c].auc_std.push_back(ms.std);
      curves[c].fold_aucs.push_back(std::move(aucs));
    }
  }
  return curves;
}

const OodRow& OodTable::row(const std::string& class_name,
                            MaskingStrategy strategy) const {
  for (const auto& r : rows) {
    if (r.class_name == class_name && r.strategy == strategy) return r;
  }
  Fail(ErrorCode::kNotFound, "no OOD row for " + class_name + "/" +
                                 std::string(StrategyName(strategy)));
}

nlohmann::json OodTable::ToJson() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows) {
    j.push_back({{"class_name", r.class_name},
                 {"strategy", std::string(StrategyName(r.strategy))},
                 {"fold_aucs", r.fold_aucs},
                 {"mean", r.mean},
                 {"std", r.std},
                 {"starred", r.starred}});
  }
  return j;
}

OodTable OodTable::FromJson(const nlohmann::json& j) {
  OodTable t;
  try {
    for (const auto& jr : j) {
      OodRow r;
      r.class_name = jr.at("class_name").get<std::string>();
      r.strategy = ParseStrategy(jr.at("strategy").get<std::string>());
      r.fold_aucs = jr.at("fold_aucs").get<std::vector<double>>();
      r.mean = jr.at("mean").get<double>();
      r.std = jr.at("std").get<double>();
      r.starred = jr.at("starred").get<bool>();
      t.rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("OOD table: ") + e.what());
  }
  return t;
}

OodTable OodEvaluate(const ModelSet& models,
                     std::span<const MaskingStrategy> strategies, int folds,
                     const std::vector<std::string>& class_names,
                     const EvalData& external, double alpha, int min_folds) {
  if (external.manifest == nullptr ||
      external.manifest->class_names != class_names) {
    Fail(ErrorCode::kSchemaError,
         "external manifest classes differ from the training classes");
  }
  const MaskingStrategy full[] = {MaskingStrategy::kFull};
  const PredictionGrid grid = PredictGrid(models, strategies, full, folds, external);
  OodTable table;
  for (size_t k = 0; k < grid.num_classes(); ++k) {
    const auto labels = grid.ClassLabels(k);
    const size_t first = table.rows.size();
    for (size_t r = 0; r < strategies.size(); ++r) {
      OodRow row;
      row.class_name = grid.class_names[k];
      row.strategy = strategies[r];
      for (int f = 0; f < folds; ++f) {
        row.fold_aucs.push_back(Auc(grid.ClassScores(r, f, 0, k), labels));
      }
      const MeanStd ms = Summarize(row.fold_aucs);
      row.mean = ms.mean;
      row.std = ms.std;
      table.rows.push_back(std::move(row));
    }
    if (strategies.size() < 2 || folds < min_folds) continue;
    size_t best = 0;
    for (size_t r = 1; r < strategies.size(); ++r) {
      if (table.rows[first + r].mean > table.rows[first + best].mean) best = r;
    }
    bool beats_all = true;
    for (size_t r = 0; r < strategies.size() && beats_all; ++r) {
      if (r == best) continue;
      std::vector<double> p;
      for (int f = 0; f < folds; ++f) {
        p.push_back(SafeDelong(grid.ClassScores(best, f, 0, k),
                               grid.ClassScores(r, f, 0, k), labels)
                        .result.p_value);
      }
      beats_all = SignificantAcrossFolds(p, alpha, min_folds);
    }
    table.rows[first + best].starred = beats_all;
  }
  return table;
}

CsvTable MatrixCsv(const std::vector<AucMatrix>& matrices) {
  CsvTable t;
  t.header = {"class_name", "train_strategy", "eval_strategy", "fold", "auc"};
  for (const auto& m : matrices) {
    for (size_t r = 0; r < m.cells.size(); ++r) {
      for (size_t c = 0; c < m.cells[r].size(); ++c) {
        const auto& aucs = m.cells[r][c].fold_aucs;
        for (size_t f = 0; f < aucs.size(); ++f) {
          t.rows.push_back({m.class_name, std::string(StrategyName(m.train_strategies[r])),
                            std::string(StrategyName(m.eval_strategies[c])),
                            std::to_string(f), Fmt(aucs[f])});
        }
      }
    }
  }
  return t;
}

CsvTable ComparisonCsv(const std::vector<StrategyComparison>& comparisons) {
  CsvTable t;
  t.header = {"class_name", "eval_strategy", "strategy_a", "strategy_b", "fold",
              "auc_a",      "auc_b",         "z",          "p_value",    "significant"};
  for (const auto& cmp : comparisons) {
    for (size_t f = 0; f < cmp.folds.size(); ++f) {
      const DelongResult& d = cmp.folds[f].result;
      t.rows.push_back({cmp.class_name, std::string(StrategyName(cmp.eval_strategy)),
                        std::string(StrategyName(cmp.strategy_a)),
                        std::string(StrategyName(cmp.strategy_b)), std::to_string(f),
                        Fmt(d.auc_a), Fmt(d.auc_b), Fmt(d.z), Fmt(d.p_value),
                        cmp.significant ? "true" : "false"});
    }
  }
  return t;
}

CsvTable CurveCsv(const std::vector<DilationCurve>& curves) {
  CsvTable t;
  t.header = {"class_name", "strategy", "subgroup", "factor", "fold", "auc"};
  for (const auto& c : curves) {
    for (size_t i = 0; i < c.factors.size(); ++i) {
      for (size_t f = 0; f < c.fold_aucs[i].size(); ++f) {
        t.rows.push_back({c.class_name, std::string(StrategyName(c.strategy)),
                          std::string(SubgroupName(c.subgroup)),
                          std::to_string(c.factors[i]), std::to_string(f),
                          Fmt(c.fold_aucs[i][f])});
      }
    }
  }
  return t;
}

CsvTable OodCsv(const OodTable& table) {
  CsvTable t;
  t.header = {"class_name", "strategy", "fold", "auc", "starred"};
  for (const auto& r : table.rows) {
    for (size_t f = 0; f < r.fold_aucs.size(); ++f) {
      t.rows.push_back({r.class_name, std::string(StrategyName(r.strategy)),
                        std::to_string(f), Fmt(r.fold_aucs[f]),
                        r.starred ? "true" : "false"});
    }
  }
  return t;
}

}  // namespace maskaudit
