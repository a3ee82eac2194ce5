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

#ifndef MASKAUDIT_TESTS_STATS_ORACLES_H_
#define MASKAUDIT_TESTS_STATS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace maskaudit::testing_util {

// Scores on a coarse grid so ties are common; both classes present.
inline void RandomScoresWithTies(int n, std::mt19937_64& rng,
                                 std::vector<double>* scores,
                                 std::vector<uint8_t>* labels) {
  scores->assign(n, 0.0);
  labels->assign(n, 0);
  std::uniform_int_distribution<int> level(0, 9);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < n; ++i) {
    (*labels)[i] = coin(rng) ? 1 : 0;
    (*scores)[i] = level(rng) / 10.0 + ((*labels)[i] ? 0.15 : 0.0);
  }
  (*labels)[0] = 0;
  (*labels)[n - 1] = 1;
}

// Direct pair counting. Wins and ties are counted as integers (ties doubled)
// so the final division is the only rounding step.
inline double BruteForceAuc(const std::vector<double>& scores,
                            const std::vector<uint8_t>& labels) {
  long long twice_u = 0, pos = 0, neg = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (labels[i]) {
      ++pos;
    } else {
      ++neg;
    }
  }
  if (pos == 0 || neg == 0) return 0.5;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) twice_u += 2;
      if (scores[i] == scores[j]) twice_u += 1;
    }
  }
  return (twice_u / 2.0) / static_cast<double>(pos * neg);
}

// Pairwise DeLong placement values.
//   v10[i] = mean_j psi(X_i, Y_j) over negatives, one entry per positive
//   v01[j] = mean_i psi(X_i, Y_j) over positives, one entry per negative
inline void NaiveComponents(const std::vector<double>& scores,
                            const std::vector<uint8_t>& labels,
                            std::vector<double>* v10, std::vector<double>* v01) {
  std::vector<double> pos, neg;
  for (size_t i = 0; i < scores.size(); ++i) {
    (labels[i] ? pos : neg).push_back(scores[i]);
  }
  v10->clear();
  v01->clear();
  for (double x : pos) {
    long long twice = 0;
    for (double y : neg) twice += x > y ? 2 : (x == y ? 1 : 0);
    v10->push_back((twice / 2.0) / static_cast<double>(neg.size()));
  }
  for (double y : neg) {
    long long twice = 0;
    for (double x : pos) twice += x > y ? 2 : (x == y ? 1 : 0);
    v01->push_back((twice / 2.0) / static_cast<double>(pos.size()));
  }
}

// Largest gap between the empirical CDF of `values` and U(0, 1).
inline double KsDistanceUniform(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (size_t i = 0; i < values.size(); ++i) {
    const double x = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, (i + 1) / n - x, x - i / n});
  }
  return d;
}

}  // namespace maskaudit::testing_util

#endif  // MASKAUDIT_TESTS_STATS_ORACLES_H_
