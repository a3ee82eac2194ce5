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

#ifndef MASKAUDIT_STUDY_SERVICE_H_
#define MASKAUDIT_STUDY_SERVICE_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "core/image.h"
#include "data/manifest.h"
#include "study/store.h"

namespace maskaudit {

// Pixels served for an item, already masked. Must be safe to call from
// several threads.
using ItemImageFn = std::function<Image(const StudyItem&)>;

struct StudyServiceOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::optional<std::filesystem::path> static_dir;  // browser bundle at "/"
};

// HTTP JSON front end of a StudySession.
//   GET  /api/classes
//   GET  /api/study/{phase}/next?annotator=ID
//   GET  /api/images/{item_id}
//   POST /api/annotations
//   GET  /api/annotations/{item_id}?annotator=ID[&audit=1]
//   GET  /api/results?phase=main[&partial=1]
//   GET  /api/progress?annotator=ID
// Reader-facing responses carry item ids, URLs and progress only.
class StudyService {
 public:
  StudyService(StudySession* session, const DatasetManifest* ground_truth, ItemImageFn images);
  ~StudyService();
  StudyService(const StudyService&) = delete;
  StudyService& operator=(const StudyService&) = delete;

  // Binds and serves on a background thread; returns the port. Throws
  // kIoError when the address cannot be bound.
  int Start(const StudyServiceOptions& options);
  // Blocks until Stop() is called from another thread.
  void Wait();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace maskaudit

#endif  // MASKAUDIT_STUDY_SERVICE_H_
