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

#ifndef MASKAUDIT_TESTS_TEST_UTIL_H_
#define MASKAUDIT_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "core/image.h"

namespace maskaudit::testing_util {

inline Image RandomImage(int c, int h, int w, std::mt19937_64& rng) {
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Image image(c, h, w);
  for (float& v : image.data) v = u(rng);
  return image;
}

// Each pixel is foreground with probability `density`.
inline BinaryMask RandomMask(int h, int w, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution b(density);
  std::vector<uint8_t> px(static_cast<size_t>(h) * w);
  for (auto& p : px) p = b(rng) ? 1 : 0;
  return BinaryMask(h, w, std::move(px));
}

// O(n^2) reference: foreground iff some foreground pixel lies within
// Euclidean distance `factor`.
inline BinaryMask BruteForceDilate(const BinaryMask& mask, int factor) {
  const int h = mask.height(), w = mask.width();
  std::vector<uint8_t> out(static_cast<size_t>(h) * w, 0);
  const long long f2 = static_cast<long long>(factor) * factor;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int rr = 0; rr < h && !out[r * w + c]; ++rr) {
        for (int cc = 0; cc < w; ++cc) {
          if (!mask.at(rr, cc)) continue;
          const long long dr = rr - r, dc = cc - c;
          if (dr * dr + dc * dc <= f2) {
            out[r * w + c] = 1;
            break;
          }
        }
      }
    }
  }
  return BinaryMask(h, w, std::move(out));
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("maskaudit_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace maskaudit::testing_util

#endif  // MASKAUDIT_TESTS_TEST_UTIL_H_
