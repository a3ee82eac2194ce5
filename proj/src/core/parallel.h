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

#ifndef MASKAUDIT_CORE_PARALLEL_H_
#define MASKAUDIT_CORE_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace maskaudit {

// Runs fn(0..n-1) on up to `max_parallel` threads (0 means hardware
// concurrency). Indices are handed out in order; the first exception thrown
// by any task is rethrown after all threads join.
void ParallelFor(size_t n, int max_parallel, const std::function<void(size_t)>& fn);

}  // namespace maskaudit

#endif  // MASKAUDIT_CORE_PARALLEL_H_
