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

#include "evaluation/auc.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/error.h"

namespace maskaudit {

std::vector<double> MidRanks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return values[a] < values[b];
  });
  std::vector<double> ranks(n);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) hold a tie; 1-based mid-rank below.
    const double mid = 0.5 * static_cast<double>(i + j + 1);
    for (size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

namespace {

void CheckLengths(size_t scores, size_t labels) {
  if (scores != labels) {
    Fail(ErrorCode::kShapeMismatch, std::to_string(scores) + " scores but " +
                                        std::to_string(labels) + " labels");
  }
}

}  // namespace

double MannWhitneyU(std::span<const double> scores,
                    std::span<const uint8_t> labels) {
  CheckLengths(scores.size(), labels.size());
  const std::vector<double> ranks = MidRanks(scores);
  double rank_sum = 0.0;
  size_t positives = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i]) {
      rank_sum += ranks[i];
      ++positives;
    }
  }
  const double p = static_cast<double>(positives);
  return rank_sum - p * (p + 1.0) / 2.0;
}

AucValue ComputeAuc(std::span<const double> scores,
                    std::span<const uint8_t> labels) {
  CheckLengths(scores.size(), labels.size());
  const size_t positives =
      static_cast<size_t>(std::count_if(labels.begin(), labels.end(),
                                        [](uint8_t l) { return l != 0; }));
  const size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) return {0.5, true};
  const double pairs =
      static_cast<double>(positives) * static_cast<double>(negatives);
  return {MannWhitneyU(scores, labels) / pairs, false};
}

double Auc(std::span<const double> scores, std::span<const uint8_t> labels) {
  return ComputeAuc(scores, labels).value;
}

MeanStd Summarize(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / n)};
}

}  // namespace maskaudit
