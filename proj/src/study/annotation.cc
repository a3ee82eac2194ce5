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

#include "study/annotation.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "core/error.h"

namespace maskaudit {

nlohmann::json Annotation::ToJson() const {
  return {{"item_id", item_id},       {"selected_conditions", selected_conditions},
          {"comment", comment},       {"annotator_id", annotator_id},
          {"timestamp", timestamp},   {"elapsed_seconds", elapsed_seconds}};
}

Annotation Annotation::FromJson(const nlohmann::json& j) {
  Annotation a;
  try {
    a.item_id = j.at("item_id").get<std::string>();
    a.selected_conditions = j.at("selected_conditions").get<std::vector<std::string>>();
    a.comment = j.value("comment", std::string());
    a.annotator_id = j.at("annotator_id").get<std::string>();
    a.timestamp = j.value("timestamp", std::string());
    a.elapsed_seconds = j.value("elapsed_seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("annotation: ") + e.what());
  }
  return a;
}

void NormalizeAnnotation(Annotation* a, std::span<const std::string> class_names) {
  auto& sel = a->selected_conditions;
  std::sort(sel.begin(), sel.end());
  sel.erase(std::unique(sel.begin(), sel.end()), sel.end());
  if (sel.empty()) {
    Fail(ErrorCode::kInvalidArgument, "select at least one condition, or \"none\"");
  }
  for (const auto& s : sel) {
    const bool known = s == kOtherLabel || s == kNoneLabel ||
                       std::find(class_names.begin(), class_names.end(), s) != class_names.end();
    if (!known) Fail(ErrorCode::kInvalidArgument, "unknown condition: " + s);
  }
  if (sel.size() > 1 && std::find(sel.begin(), sel.end(), kNoneLabel) != sel.end()) {
    Fail(ErrorCode::kInvalidArgument, "\"none\" cannot be combined with other conditions");
  }
  if (a->annotator_id.empty()) Fail(ErrorCode::kInvalidArgument, "missing annotator id");
  if (!std::isfinite(a->elapsed_seconds) || a->elapsed_seconds < 0) {
    Fail(ErrorCode::kInvalidArgument, "elapsed_seconds must be finite and non-negative");
  }
}

std::optional<double> ConditionAgreement::sensitivity() const {
  if (present == 0) return std::nullopt;
  return static_cast<double>(found) / present;
}

const StrategyAgreement& AgreementReport::strategy(MaskingStrategy s) const {
  for (const auto& st : strategies) {
    if (st.strategy == s) return st;
  }
  Fail(ErrorCode::kNotFound, "no agreement for " + std::string(StrategyName(s)));
}

nlohmann::json AgreementReport::ToJson() const {
  nlohmann::json j;
  j["phase"] = std::string(PhaseName(phase));
  j["reads"] = reads;
  j["items_total"] = items_total;
  j["items_read"] = items_read;
  j["partial"] = partial;
  j["strategies"] = nlohmann::json::array();
  for (const auto& s : strategies) {
    nlohmann::json js;
    js["strategy"] = std::string(StrategyName(s.strategy));
    js["present"] = s.present;
    js["found"] = s.found;
    js["conditions"] = nlohmann::json::array();
    for (const auto& c : s.conditions) {
      const auto sens = c.sensitivity();
      js["conditions"].push_back({{"condition", c.condition},
                                  {"present", c.present},
                                  {"found", c.found},
                                  {"sensitivity", sens ? nlohmann::json(*sens) : nullptr},
                                  {"false_positives", c.false_positives},
                                  {"absent", c.absent},
                                  {"model_total", c.model_total},
                                  {"model_agree", c.model_agree}});
    }
    j["strategies"].push_back(js);
  }
  return j;
}

AgreementReport ComputeAgreement(const StudyPlan& plan, std::span<const Annotation> annotations,
                                 const DatasetManifest& ground_truth, bool allow_partial) {
  const auto& classes = plan.class_names;
  AgreementReport report;
  report.phase = plan.phase;
  report.items_total = static_cast<int>(plan.items.size());
  for (const auto& it : plan.items) {
    const bool seen = std::any_of(report.strategies.begin(), report.strategies.end(),
                                  [&](const StrategyAgreement& s) { return s.strategy == it.strategy; });
    if (!seen) {
      StrategyAgreement s;
      s.strategy = it.strategy;
      for (const auto& c : classes) s.conditions.push_back({c});
      report.strategies.push_back(std::move(s));
    }
  }
  std::vector<int> class_index;
  for (const auto& c : classes) {
    const int idx = ground_truth.ClassIndex(c);
    if (idx < 0) Fail(ErrorCode::kSchemaError, "ground truth lacks class " + c);
    class_index.push_back(idx);
  }

  std::set<std::string> read_items;
  for (const auto& a : annotations) {
    const StudyItem* item = plan.Find(a.item_id);
    if (item == nullptr) continue;
    const Sample* sample = ground_truth.Find(item->image_id);
    if (sample == nullptr) Fail(ErrorCode::kSchemaError, "ground truth lacks " + item->image_id);
    read_items.insert(a.item_id);
    ++report.reads;
    StrategyAgreement* st = nullptr;
    for (auto& s : report.strategies) {
      if (s.strategy == item->strategy) st = &s;
    }
    const auto& sel = a.selected_conditions;
    for (size_t c = 0; c < classes.size(); ++c) {
      ConditionAgreement& ca = st->conditions[c];
      const bool truth = sample->labels[class_index[c]] != 0;
      const bool marked = std::find(sel.begin(), sel.end(), classes[c]) != sel.end();
      if (truth) {
        ++ca.present;
        ++st->present;
        if (marked) {
          ++ca.found;
          ++st->found;
        }
      } else {
        ++ca.absent;
        if (marked) ++ca.false_positives;
      }
      if (item->basis && item->basis->condition == classes[c]) {
        ++ca.model_total;
        if ((item->basis->probability >= 0.5) == marked) ++ca.model_agree;
      }
    }
  }
  report.items_read = static_cast<int>(read_items.size());
  report.partial = report.items_read < report.items_total;
  if (report.partial && !allow_partial) {
    Fail(ErrorCode::kIncompleteRun, std::to_string(report.items_total - report.items_read) +
                                        " study items have no annotation");
  }
  return report;
}

}  // namespace maskaudit
