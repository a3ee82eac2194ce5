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

#ifndef MASKAUDIT_DATA_CHEST_IMPORT_H_
#define MASKAUDIT_DATA_CHEST_IMPORT_H_

#include <string>
#include <string_view>
#include <vector>

#include "core/csv.h"
#include "core/image.h"
#include "data/manifest.h"

namespace maskaudit {

// PadChest metadata and CheXmask import. Column names follow the public
// releases: ImageID, Projection, Labels, PatientBirth, PatientSex_DICOM,
// PatientID on the metadata side; ImageID, "Dice RCA (Mean)", "Left Lung",
// "Right Lung", Height, Width on the mask side.
inline constexpr std::string_view kMaskQualityColumn = "Dice RCA (Mean)";

struct ChestFilterOptions {
  double min_mask_quality = 0.7;  // strictly above is kept
  std::vector<std::string> class_names = {"cardiomegaly", "pneumonia",
                                          "atelectasis", "pneumothorax",
                                          "effusion"};
};

// Appends the CheXmask quality column to the metadata rows (empty cell when
// no mask exists). Rows keep their order.
CsvTable JoinMaskQuality(const CsvTable& metadata, const CsvTable& chexmask);

// Drops lateral projections, null labels, labels mentioning "suboptimal
// study", "exclude" or "unchanged", rows without a mask, and rows whose mask
// quality is not above the threshold. Output has the input's schema, so the
// filter is idempotent. Throws kSchemaError when a required column is absent.
CsvTable FilterChestRows(const CsvTable& joined,
                         const ChestFilterOptions& options = {});

// Converts filtered rows into a multi-label manifest. Images resolve to
// images/<ImageID>, masks to masks/<stem>.png.
DatasetManifest BuildChestManifest(const CsvTable& filtered,
                                   const ChestFilterOptions& options = {});

// FilterChestRows followed by BuildChestManifest.
DatasetManifest FilterChestManifest(const CsvTable& joined,
                                    const ChestFilterOptions& options = {});

// Parses a PadChest label cell such as "['pleural effusion', 'nodule']".
std::vector<std::string> ParsePadchestLabels(std::string_view cell);

// CheXmask run-length encoding: whitespace separated (start, length) pairs,
// 1-based starts over the row-major flattened grid.
BinaryMask DecodeRle(std::string_view rle, int height, int width);
std::string EncodeRle(const BinaryMask& mask);

// Union of the left and right lung masks of one CheXmask row.
BinaryMask ChexmaskLungMask(const CsvTable& chexmask, size_t row);

}  // namespace maskaudit

#endif  // MASKAUDIT_DATA_CHEST_IMPORT_H_
