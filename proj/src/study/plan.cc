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

#include "study/plan.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>

#include "core/error.h"

namespace maskaudit {
namespace {

// Portable Fisher-Yates; std::shuffle differs between standard libraries.
template <typename T>
void Shuffle(std::vector<T>* v, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (size_t i = v->size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(rng() % i);
    std::swap((*v)[i - 1], (*v)[j]);
  }
}

std::string ItemId(StudyPhase phase, size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%03zu", phase == StudyPhase::kPilot ? "p" : "m",
                index + 1);
  return buf;
}

void AssignIds(StudyPlan* plan) {
  for (size_t i = 0; i < plan->items.size(); ++i) {
    plan->items[i].item_id = ItemId(plan->phase, i);
    plan->items[i].image_url = "/api/images/" + plan->items[i].item_id;
  }
}

}  // namespace

std::string_view PhaseName(StudyPhase phase) {
  return phase == StudyPhase::kPilot ? "pilot" : "main";
}

StudyPhase ParsePhase(std::string_view text) {
  if (text == "pilot") return StudyPhase::kPilot;
  if (text == "main") return StudyPhase::kMain;
  Fail(ErrorCode::kInvalidArgument, "unknown study phase: " + std::string(text));
}

std::string_view SlotName(PercentileSlot slot) {
  switch (slot) {
    case PercentileSlot::kHigh: return "high";
    case PercentileSlot::kMedian: return "median";
    case PercentileSlot::kLow: return "low";
  }
  return "?";
}

PercentileSlot ParseSlot(std::string_view text) {
  if (text == "high") return PercentileSlot::kHigh;
  if (text == "median") return PercentileSlot::kMedian;
  if (text == "low") return PercentileSlot::kLow;
  Fail(ErrorCode::kInvalidArgument, "unknown percentile slot: " + std::string(text));
}

const StudyItem* StudyPlan::Find(std::string_view item_id) const {
  for (const auto& it : items) {
    if (it.item_id == item_id) return &it;
  }
  return nullptr;
}

nlohmann::json StudyPlan::ToJson() const {
  nlohmann::json j;
  j["phase"] = std::string(PhaseName(phase));
  j["seed"] = seed;
  j["class_names"] = class_names;
  j["items"] = nlohmann::json::array();
  for (const auto& it : items) {
    nlohmann::json ji = {{"item_id", it.item_id},
                         {"image_id", it.image_id},
                         {"strategy", std::string(StrategyName(it.strategy))},
                         {"image_url", it.image_url}};
    if (it.basis) {
      ji["basis"] = {{"condition", it.basis->condition},
                     {"slot", std::string(SlotName(it.basis->slot))},
                     {"probability", it.basis->probability}};
    }
    j["items"].push_back(ji);
  }
  return j;
}

StudyPlan StudyPlan::FromJson(const nlohmann::json& j) {
  StudyPlan p;
  try {
    p.phase = ParsePhase(j.at("phase").get<std::string>());
    p.seed = j.at("seed").get<uint64_t>();
    p.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& ji : j.at("items")) {
      StudyItem it;
      it.item_id = ji.at("item_id").get<std::string>();
      it.image_id = ji.at("image_id").get<std::string>();
      it.strategy = ParseStrategy(ji.at("strategy").get<std::string>());
      it.image_url = ji.at("image_url").get<std::string>();
      if (ji.contains("basis")) {
        const auto& b = ji["basis"];
        it.basis = SelectionBasis{b.at("condition").get<std::string>(),
                                  ParseSlot(b.at("slot").get<std::string>()),
                                  b.at("probability").get<double>()};
      }
      p.items.push_back(std::move(it));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("study plan: ") + e.what());
  }
  return p;
}

StudyPlan SelectStudyImages(std::span<const StrategyPredictions> predictions,
                            const DatasetManifest& manifest, uint64_t seed, int per_cell) {
  if (per_cell != 3) Fail(ErrorCode::kInvalidArgument, "per_cell must be 3 (high/median/low)");
  if (predictions.empty()) Fail(ErrorCode::kInvalidArgument, "no predictions");
  const size_t k = manifest.class_names.size();
  std::vector<std::string> ids = predictions[0].image_ids;
  std::sort(ids.begin(), ids.end());
  for (const auto& p : predictions) {
    std::vector<std::string> other = p.image_ids;
    std::sort(other.begin(), other.end());
    if (other != ids) {
      Fail(ErrorCode::kSchemaError, "predictions for " + std::string(StrategyName(p.strategy)) +
                                        " cover different images");
    }
    if (p.probabilities.size() != p.image_ids.size() * k) {
      Fail(ErrorCode::kSchemaError, "prediction matrix does not match the class count");
    }
  }
  for (const auto& id : ids) {
    if (manifest.Find(id) == nullptr) Fail(ErrorCode::kSchemaError, "unknown image " + id);
  }
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    Fail(ErrorCode::kSchemaError, "duplicate image in predictions");
  }
  if (ids.size() < 3) {
    Fail(ErrorCode::kInsufficientImages,
         "need at least 3 test images per condition, have " + std::to_string(ids.size()));
  }

  StudyPlan plan;
  plan.phase = StudyPhase::kMain;
  plan.seed = seed;
  plan.class_names = manifest.class_names;
  for (size_t c = 0; c < k; ++c) {
    for (const auto& p : predictions) {
      std::vector<size_t> order(p.image_ids.size());
      std::iota(order.begin(), order.end(), 0);
      const auto prob = [&](size_t i) { return p.probabilities[i * k + c]; };
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (prob(a) != prob(b)) return prob(a) < prob(b);
        return p.image_ids[a] < p.image_ids[b];
      });
      // Highest probability, smallest id among equals.
      size_t high = order.back();
      for (size_t i : order) {
        if (prob(i) == prob(high) && p.image_ids[i] < p.image_ids[high]) high = i;
      }
      const size_t median = order[(order.size() - 1) / 2];
      const size_t low = order.front();
      const std::pair<PercentileSlot, size_t> picks[] = {
          {PercentileSlot::kHigh, high}, {PercentileSlot::kMedian, median},
          {PercentileSlot::kLow, low}};
      for (const auto& [slot, i] : picks) {
        StudyItem it;
        it.image_id = p.image_ids[i];
        it.strategy = p.strategy;
        it.basis = SelectionBasis{manifest.class_names[c], slot, prob(i)};
        plan.items.push_back(std::move(it));
      }
    }
  }
  Shuffle(&plan.items, seed);
  AssignIds(&plan);
  return plan;
}

StudyPlan SelectPilotImages(std::span<const std::string> pool, const DatasetManifest& manifest,
                            uint64_t seed, int count) {
  std::vector<std::string> ids(pool.begin(), pool.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (count <= 0) Fail(ErrorCode::kInvalidArgument, "pilot needs at least one image");
  if (ids.size() < static_cast<size_t>(count)) {
    Fail(ErrorCode::kInsufficientImages, "pilot pool has " + std::to_string(ids.size()) +
                                             " images, need " + std::to_string(count));
  }
  for (const auto& id : ids) {
    if (manifest.Find(id) == nullptr) Fail(ErrorCode::kSchemaError, "unknown image " + id);
  }
  Shuffle(&ids, seed);
  StudyPlan plan;
  plan.phase = StudyPhase::kPilot;
  plan.seed = seed;
  plan.class_names = manifest.class_names;
  for (int i = 0; i < count; ++i) {
    StudyItem it;
    it.image_id = ids[i];
    it.strategy = MaskingStrategy::kFull;
    plan.items.push_back(std::move(it));
  }
  AssignIds(&plan);
  return plan;
}

}  // namespace maskaudit
