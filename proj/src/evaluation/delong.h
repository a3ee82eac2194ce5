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

#ifndef MASKAUDIT_EVALUATION_DELONG_H_
#define MASKAUDIT_EVALUATION_DELONG_H_

#include <cstdint>
#include <span>
#include <vector>

namespace maskaudit {

// DeLong structural components of one classifier.
//   positive[i] = V10(X_i): share of negatives ranked below positive i
//   negative[j] = V01(Y_j): share of positives ranked above negative j
// Ties count one half. Both are computed from mid-ranks in O(n log n), and
// match the pairwise definitions exactly.
struct StructuralComponents {
  std::vector<double> positive;
  std::vector<double> negative;
  double auc = 0.5;
};

StructuralComponents ComputeStructuralComponents(
    std::span<const double> scores, std::span<const uint8_t> labels);

// DeLong variance of a single AUC: var(V10)/m + var(V01)/n with unbiased
// sample variances.
double AucVariance(const StructuralComponents& components);

struct DelongResult {
  double auc_a = 0.5;
  double auc_b = 0.5;
  double variance_diff = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // two-sided
  bool operator==(const DelongResult&) const = default;
};

// Correlated-ROC comparison of two score vectors over the same cases.
// Throws kDegenerateLabels with fewer than two positives or negatives, and
// kNumericalDegeneracy when the difference variance is zero but the AUCs
// differ. Zero variance with equal AUCs yields z = 0, p = 1.
DelongResult DelongTest(std::span<const double> scores_a,
                        std::span<const double> scores_b,
                        std::span<const uint8_t> labels);

// Standard normal CDF.
double NormalCdf(double x);

// True iff at least `min_folds` fold p-values are strictly below `alpha`.
// Throws kInvalidArgument on an empty list or fewer than `min_folds` entries.
bool SignificantAcrossFolds(std::span<const double> p_values,
                            double alpha = 0.05, int min_folds = 3);

}  // namespace maskaudit

#endif  // MASKAUDIT_EVALUATION_DELONG_H_
