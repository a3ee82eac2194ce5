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

#include "core/file_util.h"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <system_error>

#include "core/error.h"

namespace maskaudit {

namespace fs = std::filesystem;

std::vector<uint8_t> ReadFileBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFileBytes(const fs::path& path, std::span<const uint8_t> bytes) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      Fail(ErrorCode::kIoError, "cannot create directory " +
                                    path.parent_path().string() + ": " +
                                    ec.message());
    }
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) Fail(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) Fail(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    Fail(ErrorCode::kIoError,
         "cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

void WriteTextFile(const fs::path& path, std::string_view text) {
  WriteFileBytes(path, std::span<const uint8_t>(
                           reinterpret_cast<const uint8_t*>(text.data()),
                           text.size()));
}

uint64_t Fnv1a64(std::span<const uint8_t> bytes, uint64_t seed) {
  uint64_t h = 14695981039346656037ull ^ seed;
  for (uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t Fnv1a64(std::string_view text, uint64_t seed) {
  return Fnv1a64(std::span<const uint8_t>(
                     reinterpret_cast<const uint8_t*>(text.data()),
                     text.size()),
                 seed);
}

std::string HexDigest(uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace maskaudit
