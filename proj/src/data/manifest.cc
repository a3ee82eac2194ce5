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

#include "data/manifest.h"

#include <array>
#include <set>

#include "core/csv.h"
#include "core/error.h"
#include "core/file_util.h"

namespace maskaudit {
namespace {

constexpr std::array<const char*, 8> kFixedColumns = {
    "image_id", "image_path", "mask_path",  "mask_quality",
    "birth_year", "sex",      "projection", "patient_id"};

bool IsFixedColumn(const std::string& name) {
  for (const char* c : kFixedColumns) {
    if (name == c) return true;
  }
  return false;
}

std::optional<std::string> OptionalCell(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return cell;
}

}  // namespace

std::string ProjectionName(Projection p) {
  return p == Projection::kPA ? "PA" : "AP";
}

std::optional<Projection> ParseProjection(const std::string& text) {
  if (text == "PA") return Projection::kPA;
  if (text == "AP" || text == "AP_horizontal") return Projection::kAP;
  return std::nullopt;
}

void DatasetManifest::Validate() const {
  if (class_names.empty()) {
    Fail(ErrorCode::kSchemaError, "manifest '" + name + "' has no classes");
  }
  if (task == TaskKind::kBinary && class_names.size() != 1) {
    Fail(ErrorCode::kSchemaError,
         "binary manifest '" + name + "' must have exactly one class column");
  }
  std::set<std::string> seen;
  for (const Sample& s : samples) {
    if (!seen.insert(s.image_id).second) {
      Fail(ErrorCode::kSchemaError, "duplicate image_id '" + s.image_id + "'");
    }
    if (s.labels.size() != class_names.size()) {
      Fail(ErrorCode::kSchemaError,
           "sample '" + s.image_id + "' has " + std::to_string(s.labels.size()) +
               " labels for " + std::to_string(class_names.size()) + " classes");
    }
    if (s.mask_quality && (*s.mask_quality < 0.0 || *s.mask_quality > 1.0)) {
      Fail(ErrorCode::kSchemaError,
           "sample '" + s.image_id + "' has mask quality outside [0, 1]");
    }
  }
}

const Sample* DatasetManifest::Find(const std::string& image_id) const {
  for (const Sample& s : samples) {
    if (s.image_id == image_id) return &s;
  }
  return nullptr;
}

int DatasetManifest::ClassIndex(const std::string& class_name) const {
  for (size_t i = 0; i < class_names.size(); ++i) {
    if (class_names[i] == class_name) return static_cast<int>(i);
  }
  return -1;
}

uint64_t DatasetManifest::Fingerprint() const {
  std::string text = name;
  for (const auto& c : class_names) text += "|" + c;
  for (const Sample& s : samples) {
    text += "\n" + s.image_id + "," + s.image_path + "," +
            s.mask_path.value_or("") + ",";
    for (uint8_t l : s.labels) text.push_back(l ? '1' : '0');
    if (s.mask_quality) text += "," + FormatDouble(*s.mask_quality);
  }
  return Fnv1a64(text);
}

DatasetManifest ReadManifestCsv(const std::filesystem::path& path,
                                const std::string& name) {
  const CsvTable table = ReadCsvFile(path);
  DatasetManifest manifest;
  manifest.name = name.empty() ? path.stem().string() : name;
  manifest.root = path.parent_path();
  const size_t id_col = table.RequireColumn("image_id");
  const size_t path_col = table.RequireColumn("image_path");
  std::vector<size_t> class_cols;
  for (size_t i = 0; i < table.header.size(); ++i) {
    if (!IsFixedColumn(table.header[i])) {
      class_cols.push_back(i);
      manifest.class_names.push_back(table.header[i]);
    }
  }
  manifest.task = manifest.class_names.size() == 1 ? TaskKind::kBinary
                                                   : TaskKind::kMultiLabel;
  const auto mask_col = table.Column("mask_path");
  const auto quality_col = table.Column("mask_quality");
  const auto birth_col = table.Column("birth_year");
  const auto sex_col = table.Column("sex");
  const auto proj_col = table.Column("projection");
  const auto patient_col = table.Column("patient_id");
  for (const auto& row : table.rows) {
    Sample s;
    s.image_id = row[id_col];
    s.image_path = row[path_col];
    if (mask_col) s.mask_path = OptionalCell(row[*mask_col]);
    if (quality_col && !row[*quality_col].empty()) {
      s.mask_quality = ParseDouble(row[*quality_col]);
    }
    if (birth_col && !row[*birth_col].empty()) {
      s.metadata.birth_year = static_cast<int>(ParseInt(row[*birth_col]));
    }
    if (sex_col) s.metadata.sex = OptionalCell(row[*sex_col]);
    if (proj_col && !row[*proj_col].empty()) {
      s.metadata.projection = ParseProjection(row[*proj_col]);
      if (!s.metadata.projection) {
        Fail(ErrorCode::kSchemaError, "sample '" + s.image_id +
                                          "' has unknown projection '" +
                                          row[*proj_col] + "'");
      }
    }
    if (patient_col) s.metadata.patient_id = OptionalCell(row[*patient_col]);
    for (size_t c : class_cols) {
      const std::string& cell = row[c];
      if (cell != "0" && cell != "1") {
        Fail(ErrorCode::kSchemaError, "sample '" + s.image_id +
                                          "' has non-binary label '" + cell +
                                          "' in column " + table.header[c]);
      }
      s.labels.push_back(cell == "1" ? 1 : 0);
    }
    manifest.samples.push_back(std::move(s));
  }
  manifest.Validate();
  return manifest;
}

void WriteManifestCsv(const std::filesystem::path& path,
                      const DatasetManifest& manifest) {
  manifest.Validate();
  CsvTable table;
  for (const char* c : kFixedColumns) table.header.emplace_back(c);
  for (const auto& c : manifest.class_names) table.header.push_back(c);
  for (const Sample& s : manifest.samples) {
    std::vector<std::string> row = {
        s.image_id,
        s.image_path,
        s.mask_path.value_or(""),
        s.mask_quality ? FormatDouble(*s.mask_quality) : "",
        s.metadata.birth_year ? std::to_string(*s.metadata.birth_year) : "",
        s.metadata.sex.value_or(""),
        s.metadata.projection ? ProjectionName(*s.metadata.projection) : "",
        s.metadata.patient_id.value_or("")};
    for (uint8_t l : s.labels) row.push_back(l ? "1" : "0");
    table.rows.push_back(std::move(row));
  }
  WriteCsvFile(path, table);
}

}  // namespace maskaudit
