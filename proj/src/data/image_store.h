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

#ifndef MASKAUDIT_DATA_IMAGE_STORE_H_
#define MASKAUDIT_DATA_IMAGE_STORE_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "core/image.h"
#include "data/manifest.h"

namespace maskaudit {

// Pixel source for manifest samples.
class ImageStore {
 public:
  virtual ~ImageStore() = default;
  virtual Image LoadImage(const Sample& sample) const = 0;
  virtual std::optional<BinaryMask> LoadMask(const Sample& sample) const = 0;
  virtual bool HasMask(const Sample& sample) const = 0;
};

// Reads PNGs; relative sample paths resolve against `root`.
class DiskImageStore : public ImageStore {
 public:
  explicit DiskImageStore(std::filesystem::path root) : root_(std::move(root)) {}

  Image LoadImage(const Sample& sample) const override;
  std::optional<BinaryMask> LoadMask(const Sample& sample) const override;
  bool HasMask(const Sample& sample) const override;

 private:
  std::filesystem::path Resolve(const std::string& path) const;
  std::filesystem::path root_;
};

// Keeps decoded pixels in memory, keyed by image id.
class InMemoryImageStore : public ImageStore {
 public:
  void Put(const std::string& image_id, Image image,
           std::optional<BinaryMask> mask);

  Image LoadImage(const Sample& sample) const override;
  std::optional<BinaryMask> LoadMask(const Sample& sample) const override;
  bool HasMask(const Sample& sample) const override;
  size_t size() const { return images_.size(); }

 private:
  std::map<std::string, Image> images_;
  std::map<std::string, BinaryMask> masks_;
};

}  // namespace maskaudit

#endif  // MASKAUDIT_DATA_IMAGE_STORE_H_
