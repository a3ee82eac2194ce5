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

#ifndef MASKAUDIT_STUDY_STORE_H_
#define MASKAUDIT_STUDY_STORE_H_

#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "study/annotation.h"
#include "study/plan.h"

namespace maskaudit {

// ISO 8601 UTC with milliseconds.
std::string UtcTimestamp();

// Append-only JSON-lines log plus the current (annotator, item) table
// rebuilt from it on open. Each record is flushed and fsynced before the
// call returns. All methods are thread-safe; writes are serialized.
class AnnotationStore {
 public:
  using Clock = std::function<std::string()>;

  // Replays an existing log. A torn final line is ignored; any other bad
  // line throws kSchemaError. Throws kIoError when the log cannot be opened.
  explicit AnnotationStore(std::filesystem::path log_path, Clock clock = UtcTimestamp);
  ~AnnotationStore();
  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  // Stamps, persists and returns the record; an earlier record for the same
  // (annotator, item) stays in the audit trail.
  Annotation Append(StudyPhase phase, Annotation annotation);
  void ClosePhase(StudyPhase phase);
  bool IsClosed(StudyPhase phase) const;

  std::optional<Annotation> Get(const std::string& annotator, const std::string& item_id) const;
  // Every record for the pair, oldest first.
  std::vector<Annotation> History(const std::string& annotator,
                                  const std::string& item_id) const;
  // Latest record per (annotator, item) of one phase, sorted by key.
  std::vector<Annotation> Current(StudyPhase phase) const;

 private:
  using Key = std::pair<std::string, std::string>;  // annotator, item
  void Apply(const nlohmann::json& record);
  void Write(const nlohmann::json& record);

  std::filesystem::path path_;
  Clock clock_;
  std::FILE* file_ = nullptr;
  mutable std::mutex mu_;
  std::map<Key, std::vector<Annotation>> history_;
  std::map<Key, StudyPhase> phase_of_;
  std::set<StudyPhase> closed_;
};

struct PhaseProgress {
  int done = 0;
  int total = 0;
};

// Plans plus store: routing, phase rules and progress. The main phase opens
// for an annotator once every pilot item is annotated (when a pilot exists).
class StudySession {
 public:
  StudySession(std::optional<StudyPlan> pilot, StudyPlan main, AnnotationStore* store);

  const StudyPlan* plan(StudyPhase phase) const;
  // Item lookup across both phases; nullptr if absent.
  const StudyItem* Find(const std::string& item_id, StudyPhase* phase = nullptr) const;
  const std::vector<std::string>& class_names() const { return main_.class_names; }
  AnnotationStore* store() const { return store_; }

  // kNotFound for an unknown item, kPhaseClosed for a closed or locked
  // phase, kInvalidArgument for an invalid selection.
  Annotation Submit(Annotation annotation);
  // First item of the phase the annotator has not annotated, in plan order.
  // Throws kPhaseClosed while the phase is locked, kNotFound for an absent
  // pilot.
  std::optional<StudyItem> Next(StudyPhase phase, const std::string& annotator) const;
  PhaseProgress Progress(StudyPhase phase, const std::string& annotator) const;
  bool Unlocked(StudyPhase phase, const std::string& annotator) const;

  AgreementReport Results(StudyPhase phase, const DatasetManifest& ground_truth,
                          bool allow_partial) const;

 private:
  std::optional<StudyPlan> pilot_;
  StudyPlan main_;
  AnnotationStore* store_;
};

}  // namespace maskaudit

#endif  // MASKAUDIT_STUDY_STORE_H_
