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

#include "data/image_store.h"

#include "core/error.h"
#include "core/png_io.h"

namespace maskaudit {

std::filesystem::path DiskImageStore::Resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() ? p : root_ / p;
}

Image DiskImageStore::LoadImage(const Sample& sample) const {
  return ReadPngImage(Resolve(sample.image_path));
}

std::optional<BinaryMask> DiskImageStore::LoadMask(const Sample& sample) const {
  if (!sample.mask_path) return std::nullopt;
  const auto path = Resolve(*sample.mask_path);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return ReadPngMask(path);
}

bool DiskImageStore::HasMask(const Sample& sample) const {
  return sample.mask_path && std::filesystem::exists(Resolve(*sample.mask_path));
}

void InMemoryImageStore::Put(const std::string& image_id, Image image,
                             std::optional<BinaryMask> mask) {
  images_[image_id] = std::move(image);
  if (mask) {
    masks_[image_id] = std::move(*mask);
  } else {
    masks_.erase(image_id);
  }
}

Image InMemoryImageStore::LoadImage(const Sample& sample) const {
  auto it = images_.find(sample.image_id);
  if (it == images_.end()) {
    Fail(ErrorCode::kNotFound, "no image stored for '" + sample.image_id + "'");
  }
  return it->second;
}

std::optional<BinaryMask> InMemoryImageStore::LoadMask(
    const Sample& sample) const {
  auto it = masks_.find(sample.image_id);
  if (it == masks_.end()) return std::nullopt;
  return it->second;
}

bool InMemoryImageStore::HasMask(const Sample& sample) const {
  return masks_.count(sample.image_id) != 0;
}

}  // namespace maskaudit
