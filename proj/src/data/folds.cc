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

#include "data/folds.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "core/error.h"
#include "core/file_util.h"

namespace maskaudit {

nlohmann::json FoldAssignment::ToJson() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["test_ids"] = test_ids;
  j["folds"] = nlohmann::json::array();
  for (const Fold& f : folds) {
    j["folds"].push_back({{"train_ids", f.train_ids}, {"val_ids", f.val_ids}});
  }
  return j;
}

FoldAssignment FoldAssignment::FromJson(const nlohmann::json& j) {
  FoldAssignment a;
  try {
    a.seed = j.at("seed").get<uint64_t>();
    a.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    for (const auto& f : j.at("folds")) {
      a.folds.push_back({f.at("train_ids").get<std::vector<std::string>>(),
                         f.at("val_ids").get<std::vector<std::string>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("bad fold file: ") + e.what());
  }
  return a;
}

void FoldAssignment::Save(const std::filesystem::path& path) const {
  WriteTextFile(path, ToJson().dump(1) + "\n");
}

FoldAssignment FoldAssignment::Load(const std::filesystem::path& path) {
  try {
    return FromJson(nlohmann::json::parse(ReadTextFile(path)));
  } catch (const nlohmann::json::parse_error& e) {
    Fail(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

FoldAssignment Split(const DatasetManifest& manifest,
                     const SplitOptions& options) {
  if (options.k < 2) {
    Fail(ErrorCode::kInvalidArgument, "k must be at least 2");
  }
  if (!(options.test_fraction > 0.0 && options.test_fraction < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "test_fraction must lie in (0, 1)");
  }
  manifest.Validate();
  const size_t num_classes = manifest.class_names.size();
  std::vector<size_t> positives(num_classes, 0);
  for (const Sample& s : manifest.samples) {
    for (size_t c = 0; c < num_classes; ++c) positives[c] += s.labels[c];
  }
  for (size_t c = 0; c < num_classes; ++c) {
    if (positives[c] < static_cast<size_t>(options.k)) {
      Fail(ErrorCode::kStratificationError,
           "class '" + manifest.class_names[c] + "' has " +
               std::to_string(positives[c]) + " positives, fewer than k = " +
               std::to_string(options.k));
    }
  }
  const size_t rarest = static_cast<size_t>(
      std::min_element(positives.begin(), positives.end()) - positives.begin());

  // Units: single images, or patient groups. Ordered by first image id so the
  // result does not depend on manifest row order.
  std::map<std::string, std::vector<std::string>> groups;
  std::map<std::string, bool> group_positive;
  for (const Sample& s : manifest.samples) {
    std::string key = s.image_id;
    if (options.group_by_patient && s.metadata.patient_id) {
      key = "patient:" + *s.metadata.patient_id;
    }
    groups[key].push_back(s.image_id);
    group_positive[key] = group_positive[key] || s.labels[rarest] != 0;
  }
  std::vector<std::string> pos_units, neg_units;
  for (auto& [key, ids] : groups) {
    std::sort(ids.begin(), ids.end());
    (group_positive[key] ? pos_units : neg_units).push_back(key);
  }
  std::mt19937_64 rng(options.seed);
  std::shuffle(pos_units.begin(), pos_units.end(), rng);
  std::shuffle(neg_units.begin(), neg_units.end(), rng);

  const size_t units = pos_units.size() + neg_units.size();
  const size_t test_total = static_cast<size_t>(
      std::llround(options.test_fraction * static_cast<double>(units)));
  size_t test_pos = static_cast<size_t>(std::llround(
      options.test_fraction * static_cast<double>(pos_units.size())));
  test_pos = std::min({test_pos, test_total, pos_units.size()});
  const size_t test_neg = std::min(test_total - test_pos, neg_units.size());

  FoldAssignment out;
  out.seed = options.seed;
  std::vector<std::string> pool;
  auto take = [&](const std::vector<std::string>& units_in, size_t n_test) {
    for (size_t i = 0; i < units_in.size(); ++i) {
      if (i < n_test) {
        for (const auto& id : groups[units_in[i]]) out.test_ids.push_back(id);
      } else {
        pool.push_back(units_in[i]);
      }
    }
  };
  take(pos_units, test_pos);
  take(neg_units, test_neg);

  std::vector<std::vector<std::string>> val(options.k);
  for (size_t i = 0; i < pool.size(); ++i) {
    for (const auto& id : groups[pool[i]]) val[i % options.k].push_back(id);
  }
  std::sort(out.test_ids.begin(), out.test_ids.end());
  for (int f = 0; f < options.k; ++f) {
    Fold fold;
    fold.val_ids = val[f];
    for (int g = 0; g < options.k; ++g) {
      if (g == f) continue;
      fold.train_ids.insert(fold.train_ids.end(), val[g].begin(), val[g].end());
    }
    std::sort(fold.val_ids.begin(), fold.val_ids.end());
    std::sort(fold.train_ids.begin(), fold.train_ids.end());
    out.folds.push_back(std::move(fold));
  }
  return out;
}

}  // namespace maskaudit
