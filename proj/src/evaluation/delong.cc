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

#include "evaluation/delong.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/error.h"
#include "evaluation/auc.h"

namespace maskaudit {

StructuralComponents ComputeStructuralComponents(
    std::span<const double> scores, std::span<const uint8_t> labels) {
  if (scores.size() != labels.size()) {
    Fail(ErrorCode::kShapeMismatch, std::to_string(scores.size()) +
                                        " scores but " +
                                        std::to_string(labels.size()) +
                                        " labels");
  }
  std::vector<double> pos_scores, neg_scores;
  for (size_t i = 0; i < scores.size(); ++i) {
    (labels[i] ? pos_scores : neg_scores).push_back(scores[i]);
  }
  const size_t m = pos_scores.size();
  const size_t n = neg_scores.size();
  if (m == 0 || n == 0) {
    Fail(ErrorCode::kDegenerateLabels,
         "structural components need both classes (" + std::to_string(m) +
             " positives, " + std::to_string(n) + " negatives)");
  }
  std::vector<double> all(pos_scores);
  all.insert(all.end(), neg_scores.begin(), neg_scores.end());
  const std::vector<double> rank_all = MidRanks(all);
  const std::vector<double> rank_pos = MidRanks(pos_scores);
  const std::vector<double> rank_neg = MidRanks(neg_scores);

  StructuralComponents out;
  out.positive.resize(m);
  out.negative.resize(n);
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  double u = 0.0;
  for (size_t i = 0; i < m; ++i) {
    // Negatives below positive i, ties halved: an exact half-integer.
    const double below = rank_all[i] - rank_pos[i];
    out.positive[i] = below / dn;
    u += below;
  }
  for (size_t j = 0; j < n; ++j) {
    const double below = rank_all[m + j] - rank_neg[j];  // positives below
    out.negative[j] = (dm - below) / dm;
  }
  out.auc = u / (dm * dn);
  return out;
}

namespace {

double Covariance(std::span<const double> x, std::span<const double> y) {
  const size_t n = x.size();
  if (n < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(n - 1);
}

}  // namespace

double AucVariance(const StructuralComponents& c) {
  return Covariance(c.positive, c.positive) /
             static_cast<double>(c.positive.size()) +
         Covariance(c.negative, c.negative) /
             static_cast<double>(c.negative.size());
}

double NormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

DelongResult DelongTest(std::span<const double> scores_a,
                        std::span<const double> scores_b,
                        std::span<const uint8_t> labels) {
  if (scores_a.size() != labels.size() || scores_b.size() != labels.size()) {
    Fail(ErrorCode::kShapeMismatch,
         "DeLong test needs both score vectors aligned to the labels");
  }
  const size_t m = static_cast<size_t>(
      std::count_if(labels.begin(), labels.end(), [](uint8_t l) { return l; }));
  const size_t n = labels.size() - m;
  if (m < 2 || n < 2) {
    Fail(ErrorCode::kDegenerateLabels,
         "DeLong test needs at least two positives and two negatives (" +
             std::to_string(m) + " positives, " + std::to_string(n) +
             " negatives)");
  }
  const StructuralComponents a = ComputeStructuralComponents(scores_a, labels);
  const StructuralComponents b = ComputeStructuralComponents(scores_b, labels);
  const double dm = static_cast<double>(m);
  const double dn = static_cast<double>(n);
  const double var_a = Covariance(a.positive, a.positive) / dm +
                       Covariance(a.negative, a.negative) / dn;
  const double var_b = Covariance(b.positive, b.positive) / dm +
                       Covariance(b.negative, b.negative) / dn;
  const double cov_ab = Covariance(a.positive, b.positive) / dm +
                        Covariance(a.negative, b.negative) / dn;

  DelongResult result;
  result.auc_a = a.auc;
  result.auc_b = b.auc;
  result.variance_diff = std::max(0.0, var_a + var_b - 2.0 * cov_ab);
  const double diff = a.auc - b.auc;
  if (result.variance_diff <= 0.0) {
    if (diff != 0.0) {
      Fail(ErrorCode::kNumericalDegeneracy,
           "AUCs differ (" + std::to_string(a.auc) + " vs " +
               std::to_string(b.auc) + ") but the difference has zero variance");
    }
    result.z = 0.0;
    result.p_value = 1.0;
    return result;
  }
  result.z = diff / std::sqrt(result.variance_diff);
  result.p_value = std::min(1.0, std::erfc(std::abs(result.z) / std::sqrt(2.0)));
  return result;
}

bool SignificantAcrossFolds(std::span<const double> p_values, double alpha,
                            int min_folds) {
  if (p_values.empty()) {
    Fail(ErrorCode::kInvalidArgument, "no fold p-values given");
  }
  if (min_folds < 1 || static_cast<int>(p_values.size()) < min_folds) {
    Fail(ErrorCode::kInvalidArgument,
         "need at least " + std::to_string(min_folds) + " fold p-values, got " +
             std::to_string(p_values.size()));
  }
  const auto below = std::count_if(p_values.begin(), p_values.end(),
                                   [&](double p) { return p < alpha; });
  return below >= min_folds;
}

}  // namespace maskaudit
