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

#include "study/store.h"

#include <unistd.h>

#include <chrono>
#include <ctime>

#include "core/error.h"
#include "core/file_util.h"
#include "core/log.h"

namespace maskaudit {

std::string UtcTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(ms));
  return buf;
}

AnnotationStore::AnnotationStore(std::filesystem::path log_path, Clock clock)
    : path_(std::move(log_path)), clock_(std::move(clock)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  if (std::filesystem::exists(path_)) {
    const std::string text = ReadTextFile(path_);
    size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
      const size_t end = text.find('\n', pos);
      ++line_no;
      if (end == std::string::npos) {
        LogWarning("dropping torn final line in ", path_.string());
        std::filesystem::resize_file(path_, pos);
        break;
      }
      const std::string_view line(text.data() + pos, end - pos);
      pos = end + 1;
      if (line.empty()) continue;
      try {
        Apply(nlohmann::json::parse(line));
      } catch (const nlohmann::json::exception& e) {
        Fail(ErrorCode::kSchemaError,
             path_.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  file_ = std::fopen(path_.c_str(), "a");
  if (file_ == nullptr) Fail(ErrorCode::kIoError, "cannot open " + path_.string());
}

AnnotationStore::~AnnotationStore() {
  if (file_ != nullptr) std::fclose(file_);
}

void AnnotationStore::Apply(const nlohmann::json& record) {
  const std::string type = record.at("type").get<std::string>();
  const StudyPhase phase = ParsePhase(record.at("phase").get<std::string>());
  if (type == "close") {
    closed_.insert(phase);
    return;
  }
  if (type != "annotation") Fail(ErrorCode::kSchemaError, "unknown log record " + type);
  Annotation a = Annotation::FromJson(record.at("annotation"));
  const Key key{a.annotator_id, a.item_id};
  phase_of_[key] = phase;
  history_[key].push_back(std::move(a));
}

void AnnotationStore::Write(const nlohmann::json& record) {
  const std::string line = record.dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() ||
      std::fflush(file_) != 0 || ::fsync(::fileno(file_)) != 0) {
    Fail(ErrorCode::kIoError, "cannot append to " + path_.string());
  }
}

Annotation AnnotationStore::Append(StudyPhase phase, Annotation annotation) {
  std::lock_guard lock(mu_);
  if (closed_.count(phase)) {
    Fail(ErrorCode::kPhaseClosed, std::string(PhaseName(phase)) + " phase is closed");
  }
  annotation.timestamp = clock_();
  const nlohmann::json record = {{"type", "annotation"},
                                 {"phase", std::string(PhaseName(phase))},
                                 {"annotation", annotation.ToJson()}};
  Write(record);
  Apply(record);
  return annotation;
}

void AnnotationStore::ClosePhase(StudyPhase phase) {
  std::lock_guard lock(mu_);
  if (closed_.count(phase)) return;
  const nlohmann::json record = {{"type", "close"}, {"phase", std::string(PhaseName(phase))}};
  Write(record);
  Apply(record);
}

bool AnnotationStore::IsClosed(StudyPhase phase) const {
  std::lock_guard lock(mu_);
  return closed_.count(phase) > 0;
}

std::optional<Annotation> AnnotationStore::Get(const std::string& annotator,
                                               const std::string& item_id) const {
  std::lock_guard lock(mu_);
  const auto it = history_.find({annotator, item_id});
  if (it == history_.end()) return std::nullopt;
  return it->second.back();
}

std::vector<Annotation> AnnotationStore::History(const std::string& annotator,
                                                 const std::string& item_id) const {
  std::lock_guard lock(mu_);
  const auto it = history_.find({annotator, item_id});
  return it == history_.end() ? std::vector<Annotation>{} : it->second;
}

std::vector<Annotation> AnnotationStore::Current(StudyPhase phase) const {
  std::lock_guard lock(mu_);
  std::vector<Annotation> out;
  for (const auto& [key, records] : history_) {
    if (phase_of_.at(key) == phase) out.push_back(records.back());
  }
  return out;
}

StudySession::StudySession(std::optional<StudyPlan> pilot, StudyPlan main,
                           AnnotationStore* store)
    : pilot_(std::move(pilot)), main_(std::move(main)), store_(store) {
  if (pilot_ && pilot_->class_names != main_.class_names) {
    Fail(ErrorCode::kSchemaError, "pilot and main plans list different classes");
  }
  if (pilot_ && pilot_->phase != StudyPhase::kPilot) {
    Fail(ErrorCode::kSchemaError, "pilot plan is not marked as pilot");
  }
  if (main_.phase != StudyPhase::kMain) {
    Fail(ErrorCode::kSchemaError, "main plan is not marked as main");
  }
}

const StudyPlan* StudySession::plan(StudyPhase phase) const {
  if (phase == StudyPhase::kMain) return &main_;
  return pilot_ ? &*pilot_ : nullptr;
}

const StudyItem* StudySession::Find(const std::string& item_id, StudyPhase* phase) const {
  for (StudyPhase p : {StudyPhase::kPilot, StudyPhase::kMain}) {
    const StudyPlan* pl = plan(p);
    if (pl == nullptr) continue;
    if (const StudyItem* it = pl->Find(item_id)) {
      if (phase != nullptr) *phase = p;
      return it;
    }
  }
  return nullptr;
}

bool StudySession::Unlocked(StudyPhase phase, const std::string& annotator) const {
  if (store_->IsClosed(phase)) return false;
  if (phase == StudyPhase::kPilot || !pilot_) return true;
  const PhaseProgress p = Progress(StudyPhase::kPilot, annotator);
  return p.done == p.total;
}

Annotation StudySession::Submit(Annotation annotation) {
  StudyPhase phase;
  if (Find(annotation.item_id, &phase) == nullptr) {
    Fail(ErrorCode::kNotFound, "unknown study item " + annotation.item_id);
  }
  NormalizeAnnotation(&annotation, main_.class_names);
  if (!Unlocked(phase, annotation.annotator_id)) {
    Fail(ErrorCode::kPhaseClosed, std::string(PhaseName(phase)) + " phase is not open for " +
                                      annotation.annotator_id);
  }
  return store_->Append(phase, std::move(annotation));
}

std::optional<StudyItem> StudySession::Next(StudyPhase phase, const std::string& annotator) const {
  const StudyPlan* pl = plan(phase);
  if (pl == nullptr) Fail(ErrorCode::kNotFound, "no pilot plan");
  if (!Unlocked(phase, annotator)) {
    Fail(ErrorCode::kPhaseClosed, std::string(PhaseName(phase)) + " phase is not open");
  }
  for (const auto& it : pl->items) {
    if (!store_->Get(annotator, it.item_id)) return it;
  }
  return std::nullopt;
}

PhaseProgress StudySession::Progress(StudyPhase phase, const std::string& annotator) const {
  PhaseProgress p;
  const StudyPlan* pl = plan(phase);
  if (pl == nullptr) return p;
  p.total = static_cast<int>(pl->items.size());
  for (const auto& it : pl->items) p.done += store_->Get(annotator, it.item_id) ? 1 : 0;
  return p;
}

AgreementReport StudySession::Results(StudyPhase phase, const DatasetManifest& ground_truth,
                                      bool allow_partial) const {
  const StudyPlan* pl = plan(phase);
  if (pl == nullptr) Fail(ErrorCode::kNotFound, "no pilot plan");
  const std::vector<Annotation> current = store_->Current(phase);
  return ComputeAgreement(*pl, current, ground_truth, allow_partial);
}

}  // namespace maskaudit
