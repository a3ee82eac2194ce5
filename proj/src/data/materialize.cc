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

#include "data/materialize.h"

#include <algorithm>

#include "core/error.h"

namespace maskaudit {

std::string_view SubgroupName(DilationSubgroup subgroup) {
  switch (subgroup) {
    case DilationSubgroup::kAll: return "all";
    case DilationSubgroup::kPositivesOnly: return "positives_only";
    case DilationSubgroup::kNegativesOnly: return "negatives_only";
  }
  return "all";
}

DilationSubgroup ParseSubgroup(std::string_view text) {
  if (text == "all") return DilationSubgroup::kAll;
  if (text == "positives_only") return DilationSubgroup::kPositivesOnly;
  if (text == "negatives_only") return DilationSubgroup::kNegativesOnly;
  Fail(ErrorCode::kInvalidArgument,
       "unknown subgroup '" + std::string(text) +
           "' (expected all, positives_only or negatives_only)");
}

MaskedView::MaskedView(const DatasetManifest& manifest, const ImageStore& store,
                       std::vector<std::string> image_ids,
                       MaskingStrategy strategy, MaterializeOptions options)
    : store_(&store), strategy_(strategy), options_(std::move(options)) {
  std::sort(image_ids.begin(), image_ids.end());
  samples_.reserve(image_ids.size());
  for (const auto& id : image_ids) {
    const Sample* s = manifest.Find(id);
    if (s == nullptr) {
      Fail(ErrorCode::kNotFound, "image '" + id + "' is not in manifest '" +
                                     manifest.name + "'");
    }
    if (strategy != MaskingStrategy::kFull && !store.HasMask(*s)) {
      Fail(ErrorCode::kMissingMask, id);
    }
    samples_.push_back(s);
  }
  if (options_.dilation_factor < 0) {
    Fail(ErrorCode::kInvalidArgument, "dilation factor must be non-negative");
  }
  if (options_.subgroup_class < 0 ||
      options_.subgroup_class >= static_cast<int>(manifest.class_names.size())) {
    Fail(ErrorCode::kInvalidArgument, "subgroup class index out of range");
  }
}

MaskedView::MaskedView(const DatasetManifest& manifest, const ImageStore& store,
                       MaskingStrategy strategy, MaterializeOptions options)
    : MaskedView(manifest, store,
                 [&] {
                   std::vector<std::string> ids;
                   for (const auto& s : manifest.samples) ids.push_back(s.image_id);
                   return ids;
                 }(),
                 strategy, std::move(options)) {}

Image MaskedView::GetRaw(size_t i) const {
  const Sample& s = *samples_.at(i);
  const Image raw = store_->LoadImage(s);
  const ResizePlan plan =
      PlanLetterbox(raw.height, raw.width, options_.target_size);
  Image image = ResizeImage(raw, plan);
  if (strategy_ == MaskingStrategy::kFull) return image;

  std::optional<BinaryMask> mask = store_->LoadMask(s);
  if (!mask) Fail(ErrorCode::kMissingMask, s.image_id);
  if (mask->height() != raw.height || mask->width() != raw.width) {
    Fail(ErrorCode::kShapeMismatch,
         "mask of '" + s.image_id + "' does not match its image size");
  }
  BinaryMask region = ResizeMask(*mask, plan);
  bool dilate = options_.dilation_factor > 0;
  const bool positive = s.labels[options_.subgroup_class] != 0;
  if (options_.subgroup == DilationSubgroup::kPositivesOnly) dilate &= positive;
  if (options_.subgroup == DilationSubgroup::kNegativesOnly) dilate &= !positive;
  if (dilate) region = Dilate(region, options_.dilation_factor);
  return ApplyMasking(image, &region, strategy_, options_.fill);
}

MaskedSample MaskedView::Get(size_t i) const {
  Image image = GetRaw(i);
  if (options_.normalize) {
    const Normalization norm =
        options_.normalization.value_or(Normalization::ImageNet(image.channels));
    image = Normalize(image, norm);
  }
  return {std::move(image), samples_[i]->labels};
}

}  // namespace maskaudit
