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

#ifndef MASKAUDIT_CORE_FILE_UTIL_H_
#define MASKAUDIT_CORE_FILE_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace maskaudit {

std::vector<uint8_t> ReadFileBytes(const std::filesystem::path& path);
std::string ReadTextFile(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place, creating
// parent directories as needed. Throws kIoError on failure.
void WriteFileBytes(const std::filesystem::path& path,
                    std::span<const uint8_t> bytes);
void WriteTextFile(const std::filesystem::path& path, std::string_view text);

// 64-bit FNV-1a, used for dataset and model fingerprints.
uint64_t Fnv1a64(std::span<const uint8_t> bytes, uint64_t seed = 0);
uint64_t Fnv1a64(std::string_view text, uint64_t seed = 0);
std::string HexDigest(uint64_t value);

}  // namespace maskaudit

#endif  // MASKAUDIT_CORE_FILE_UTIL_H_
