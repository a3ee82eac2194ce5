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

#ifndef MASKAUDIT_DATA_MATERIALIZE_H_
#define MASKAUDIT_DATA_MATERIALIZE_H_

#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "core/image.h"
#include "data/image_store.h"
#include "data/manifest.h"
#include "masking/mask_ops.h"

namespace maskaudit {

enum class DilationSubgroup { kAll, kPositivesOnly, kNegativesOnly };

std::string_view SubgroupName(DilationSubgroup subgroup);
DilationSubgroup ParseSubgroup(std::string_view text);

struct MaterializeOptions {
  int target_size = 512;
  // Defaults to ImageNet statistics for the image's channel count.
  std::optional<Normalization> normalization;
  bool normalize = true;
  int dilation_factor = 0;
  DilationSubgroup subgroup = DilationSubgroup::kAll;
  int subgroup_class = 0;  // class deciding subgroup membership
  float fill = kMaskedValue;
};

struct MaskedSample {
  Image image;
  std::vector<uint8_t> labels;
};

// Lazy view of a manifest subset under one masking strategy. Each access runs
// letterbox -> dilate (selected subgroup only) -> mask -> normalize, so
// removed pixels are black before normalization. Samples are ordered by
// image id. Construction throws kMissingMask(image_id) when a non-FULL
// strategy meets a sample without a mask.
class MaskedView {
 public:
  MaskedView(const DatasetManifest& manifest, const ImageStore& store,
             std::vector<std::string> image_ids, MaskingStrategy strategy,
             MaterializeOptions options);
  // Whole manifest.
  MaskedView(const DatasetManifest& manifest, const ImageStore& store,
             MaskingStrategy strategy, MaterializeOptions options);

  size_t size() const { return samples_.size(); }
  const Sample& sample(size_t i) const { return *samples_[i]; }
  MaskingStrategy strategy() const { return strategy_; }
  const MaterializeOptions& options() const { return options_; }
  MaskedSample Get(size_t i) const;
  // Raw-space image after letterboxing, dilation and masking.
  Image GetRaw(size_t i) const;

  class Iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = MaskedSample;
    using difference_type = std::ptrdiff_t;
    using pointer = const MaskedSample*;
    using reference = MaskedSample;

    Iterator(const MaskedView* view, size_t index) : view_(view), index_(index) {}
    MaskedSample operator*() const { return view_->Get(index_); }
    Iterator& operator++() {
      ++index_;
      return *this;
    }
    bool operator==(const Iterator& o) const { return index_ == o.index_; }

   private:
    const MaskedView* view_;
    size_t index_;
  };
  Iterator begin() const { return {this, 0}; }
  Iterator end() const { return {this, samples_.size()}; }

 private:
  const ImageStore* store_;
  std::vector<const Sample*> samples_;
  MaskingStrategy strategy_;
  MaterializeOptions options_;
};

}  // namespace maskaudit

#endif  // MASKAUDIT_DATA_MATERIALIZE_H_
