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

#ifndef MASKAUDIT_DATA_MANIFEST_H_
#define MASKAUDIT_DATA_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace maskaudit {

enum class Projection { kPA, kAP };

struct SampleMetadata {
  std::optional<int> birth_year;
  std::optional<std::string> sex;
  std::optional<Projection> projection;
  std::optional<std::string> patient_id;

  bool operator==(const SampleMetadata&) const = default;
};

struct Sample {
  std::string image_id;
  std::string image_path;  // relative paths resolve against the manifest root
  std::vector<uint8_t> labels;
  SampleMetadata metadata;
  std::optional<std::string> mask_path;
  std::optional<double> mask_quality;  // Dice RCA (mean), in [0, 1]

  bool operator==(const Sample&) const = default;
};

enum class TaskKind { kMultiLabel, kBinary };

struct DatasetManifest {
  std::string name;
  std::vector<std::string> class_names;
  std::vector<Sample> samples;
  TaskKind task = TaskKind::kBinary;
  // Directory that relative image and mask paths resolve against.
  std::filesystem::path root;

  // Throws kSchemaError on duplicate ids, label/class count mismatch, a
  // binary task with more than one class, or mask quality outside [0, 1].
  void Validate() const;

  const Sample* Find(const std::string& image_id) const;
  int ClassIndex(const std::string& class_name) const;  // -1 if absent
  // Order-sensitive fingerprint over ids, labels, metadata and paths.
  uint64_t Fingerprint() const;

  bool operator==(const DatasetManifest& other) const {
    return name == other.name && class_names == other.class_names &&
           samples == other.samples && task == other.task;
  }
};

std::string ProjectionName(Projection p);
std::optional<Projection> ParseProjection(const std::string& text);

// One CSV per dataset: image_id, image_path, mask_path, mask_quality,
// birth_year, sex, projection, patient_id, then one 0/1 column per class.
// Absent values are empty cells. Class columns are every column outside the
// fixed set, in header order.
DatasetManifest ReadManifestCsv(const std::filesystem::path& path,
                                const std::string& name = "");
void WriteManifestCsv(const std::filesystem::path& path,
                      const DatasetManifest& manifest);

}  // namespace maskaudit

#endif  // MASKAUDIT_DATA_MANIFEST_H_
