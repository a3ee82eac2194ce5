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

#ifndef MASKAUDIT_CORE_LOG_H_
#define MASKAUDIT_CORE_LOG_H_

#include <functional>
#include <sstream>
#include <string>

namespace maskaudit {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3 };

using LogSink = std::function<void(LogLevel, const std::string&)>;

// Replaces the process-wide sink. The default writes to stderr at kInfo and
// above. Passing an empty function restores the default.
void SetLogSink(LogSink sink);
void SetMinLogLevel(LogLevel level);
void Log(LogLevel level, const std::string& message);

template <typename... Args>
void LogInfo(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  Log(LogLevel::kInfo, os.str());
}

template <typename... Args>
void LogWarning(const Args&... args) {
  std::ostringstream os;
  (os << ... << args);
  Log(LogLevel::kWarning, os.str());
}

}  // namespace maskaudit

#endif  // MASKAUDIT_CORE_LOG_H_
