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

#include "training/tabular.h"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "core/error.h"
#include "evaluation/auc.h"

namespace maskaudit {
namespace {

constexpr double kRidge = 1e-6;
constexpr int kMaxNewtonSteps = 50;

}  // namespace

double LogisticModel::Logit(const std::vector<double>& x) const {
  double z = bias;
  for (size_t i = 0; i < x.size(); ++i) z += weights[i] * x[i];
  return z;
}

bool HasTabularFeatures(const Sample& s) {
  return s.metadata.birth_year && s.metadata.sex && s.metadata.projection;
}

std::vector<double> TabularModel::Features(const Sample& s) const {
  if (!HasTabularFeatures(s)) return {};
  std::vector<double> x;
  for (const auto& level : sex_levels) x.push_back(*s.metadata.sex == level ? 1.0 : 0.0);
  x.push_back(*s.metadata.projection == Projection::kPA ? 1.0 : 0.0);
  x.push_back(*s.metadata.projection == Projection::kAP ? 1.0 : 0.0);
  x.push_back((*s.metadata.birth_year - year_mean) / year_std);
  return x;
}

LogisticModel FitLogistic(const std::vector<std::vector<double>>& x,
                          const std::vector<uint8_t>& y) {
  if (x.empty()) Fail(ErrorCode::kInvalidArgument, "no rows to fit");
  const size_t pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == y.size()) {
    Fail(ErrorCode::kDegenerateLabels, "labels hold a single class");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index d = static_cast<Eigen::Index>(x[0].size()) + 1;
  Eigen::MatrixXd a(n, d);
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < d; ++j) a(i, j) = x[i][j - 1];
    t(i) = y[i];
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd ridge = Eigen::MatrixXd::Identity(d, d) * kRidge;
  ridge(0, 0) = 0.0;
  for (int step = 0; step < kMaxNewtonSteps; ++step) {
    const Eigen::VectorXd z = a * beta;
    Eigen::VectorXd p(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = 1.0 / (1.0 + std::exp(-z(i)));
      w(i) = std::max(p(i) * (1.0 - p(i)), 1e-12);
    }
    const Eigen::VectorXd grad = a.transpose() * (p - t) + ridge * beta;
    const Eigen::MatrixXd hess =
        a.transpose() * w.asDiagonal() * a + ridge +
        Eigen::MatrixXd::Identity(d, d) * 1e-12;
    const Eigen::VectorXd delta = hess.ldlt().solve(grad);
    if (!delta.allFinite()) break;
    beta -= delta;
    if (delta.lpNorm<Eigen::Infinity>() < 1e-10) break;
  }
  LogisticModel m;
  m.bias = beta(0);
  for (Eigen::Index j = 1; j < d; ++j) m.weights.push_back(beta(j));
  return m;
}

TabularModel TrainTabularBaseline(const DatasetManifest& manifest,
                                  const std::vector<std::string>& train_ids) {
  std::vector<const Sample*> rows;
  for (const auto& id : train_ids) {
    const Sample* s = manifest.Find(id);
    if (s != nullptr && HasTabularFeatures(*s)) rows.push_back(s);
  }
  if (rows.empty()) {
    Fail(ErrorCode::kInvalidArgument, "no training rows with complete metadata");
  }
  TabularModel model;
  std::set<std::string> levels;
  double sum = 0.0, sq = 0.0;
  for (const Sample* s : rows) {
    levels.insert(*s->metadata.sex);
    sum += *s->metadata.birth_year;
  }
  model.sex_levels.assign(levels.begin(), levels.end());
  model.year_mean = sum / rows.size();
  for (const Sample* s : rows) {
    const double dv = *s->metadata.birth_year - model.year_mean;
    sq += dv * dv;
  }
  model.year_std = std::sqrt(sq / rows.size());
  if (model.year_std == 0.0) model.year_std = 1.0;

  std::vector<std::vector<double>> x;
  for (const Sample* s : rows) x.push_back(model.Features(*s));
  for (size_t c = 0; c < manifest.class_names.size(); ++c) {
    std::vector<uint8_t> y;
    for (const Sample* s : rows) y.push_back(s->labels[c]);
    try {
      model.per_class.push_back(FitLogistic(x, y));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateLabels) throw;
      Fail(ErrorCode::kDegenerateLabels,
           "class '" + manifest.class_names[c] + "': " + e.what());
    }
  }
  return model;
}

std::vector<double> ScoreTabular(const TabularModel& model,
                                 const DatasetManifest& manifest,
                                 const std::vector<std::string>& ids,
                                 std::vector<std::string>* used) {
  std::vector<double> out;
  used->clear();
  for (const auto& id : ids) {
    const Sample* s = manifest.Find(id);
    if (s == nullptr) continue;
    const std::vector<double> x = model.Features(*s);
    if (x.empty()) continue;
    used->push_back(id);
    for (const auto& m : model.per_class) out.push_back(m.Logit(x));
  }
  return out;
}

nlohmann::json TabularBaselineResult::ToJson() const {
  nlohmann::json j;
  j["rows_used"] = rows_used;
  j["rows_dropped"] = rows_dropped;
  j["classes"] = nlohmann::json::array();
  for (const auto& c : classes) {
    j["classes"].push_back({{"class_name", c.class_name},
                            {"fold_aucs", c.fold_aucs},
                            {"mean", c.mean},
                            {"std", c.std}});
  }
  return j;
}

TabularBaselineResult EvaluateTabularBaseline(const DatasetManifest& manifest,
                                              const FoldAssignment& folds) {
  TabularBaselineResult result;
  for (const auto& s : manifest.samples) {
    (HasTabularFeatures(s) ? result.rows_used : result.rows_dropped) += 1;
  }
  const size_t k = manifest.class_names.size();
  result.classes.resize(k);
  for (size_t c = 0; c < k; ++c) result.classes[c].class_name = manifest.class_names[c];
  for (const Fold& fold : folds.folds) {
    const TabularModel model = TrainTabularBaseline(manifest, fold.train_ids);
    std::vector<std::string> used;
    const std::vector<double> scores =
        ScoreTabular(model, manifest, folds.test_ids, &used);
    for (size_t c = 0; c < k; ++c) {
      std::vector<double> s;
      std::vector<uint8_t> y;
      for (size_t i = 0; i < used.size(); ++i) {
        s.push_back(scores[i * k + c]);
        y.push_back(manifest.Find(used[i])->labels[c]);
      }
      result.classes[c].fold_aucs.push_back(Auc(s, y));
    }
  }
  for (auto& c : result.classes) {
    const MeanStd ms = Summarize(c.fold_aucs);
    c.mean = ms.mean;
    c.std = ms.std;
  }
  return result;
}

}  // namespace maskaudit
