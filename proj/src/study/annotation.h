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

#ifndef MASKAUDIT_STUDY_ANNOTATION_H_
#define MASKAUDIT_STUDY_ANNOTATION_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/manifest.h"
#include "study/plan.h"

namespace maskaudit {

inline constexpr std::string_view kOtherLabel = "other";
inline constexpr std::string_view kNoneLabel = "none";

struct Annotation {
  std::string item_id;
  std::vector<std::string> selected_conditions;  // sorted, unique
  std::string comment;
  std::string annotator_id;
  std::string timestamp;  // ISO 8601 UTC, set by the store
  double elapsed_seconds = 0.0;

  nlohmann::json ToJson() const;
  // kSchemaError on missing or mistyped fields.
  static Annotation FromJson(const nlohmann::json& j);
  bool operator==(const Annotation&) const = default;
};

// Sorts and deduplicates the selection, then checks it: non-empty, every
// entry a class name, "other" or "none", and "none" alone. Also requires an
// annotator id and a finite, non-negative elapsed time. Throws
// kInvalidArgument.
void NormalizeAnnotation(Annotation* a, std::span<const std::string> class_names);

struct ConditionAgreement {
  std::string condition;
  int present = 0;          // (read, item) pairs where the condition is present
  int found = 0;            // ... and the reader selected it
  int false_positives = 0;  // selected but absent
  int absent = 0;           // reads where the condition is absent
  int model_total = 0;      // reads of items selected for this condition
  int model_agree = 0;      // reader call equals model call (p >= 0.5)
  std::optional<double> sensitivity() const;
  bool operator==(const ConditionAgreement&) const = default;
};

struct StrategyAgreement {
  MaskingStrategy strategy = MaskingStrategy::kFull;
  std::vector<ConditionAgreement> conditions;  // class order
  int present = 0;
  int found = 0;
  bool operator==(const StrategyAgreement&) const = default;
};

struct AgreementReport {
  StudyPhase phase = StudyPhase::kMain;
  int reads = 0;  // annotations counted
  int items_total = 0;
  int items_read = 0;  // items with at least one annotation
  bool partial = false;
  std::vector<StrategyAgreement> strategies;  // strategies in plan order

  const StrategyAgreement& strategy(MaskingStrategy s) const;
  nlohmann::json ToJson() const;
  bool operator==(const AgreementReport&) const = default;
};

// Reader detection statistics against the manifest labels. Every
// annotation is one read; annotations of unknown items are ignored. Throws
// kIncompleteRun when some plan item is unread and `allow_partial` is off.
AgreementReport ComputeAgreement(const StudyPlan& plan,
                                 std::span<const Annotation> annotations,
                                 const DatasetManifest& ground_truth,
                                 bool allow_partial = false);

}  // namespace maskaudit

#endif  // MASKAUDIT_STUDY_ANNOTATION_H_
