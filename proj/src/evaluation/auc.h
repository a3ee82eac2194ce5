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

#ifndef MASKAUDIT_EVALUATION_AUC_H_
#define MASKAUDIT_EVALUATION_AUC_H_

#include <cstdint>
#include <span>
#include <vector>

namespace maskaudit {

// Mid-ranks (1-based, ties share the average of their positions). Every value
// is an exact half-integer.
std::vector<double> MidRanks(std::span<const double> values);

// Mann-Whitney U for positives over negatives: wins + half ties. Exact
// half-integer for any realistic sample size.
double MannWhitneyU(std::span<const double> scores,
                    std::span<const uint8_t> labels);

struct AucValue {
  double value = 0.5;
  // Set when the labels hold a single class; value is then 0.5.
  bool degenerate = false;
};

// Area under the ROC curve as U / (positives * negatives); tied scores count
// one half, so constant scores give exactly 0.5. Throws kShapeMismatch when
// the lengths differ.
AucValue ComputeAuc(std::span<const double> scores,
                    std::span<const uint8_t> labels);

// Convenience for callers that accept the single-class convention silently.
double Auc(std::span<const double> scores, std::span<const uint8_t> labels);

// Population mean and standard deviation (ddof = 0) used for fold summaries.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd Summarize(std::span<const double> values);

}  // namespace maskaudit

#endif  // MASKAUDIT_EVALUATION_AUC_H_
