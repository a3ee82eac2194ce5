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

#include "data/chest_import.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "core/error.h"

namespace maskaudit {
namespace {

std::string Lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string Trim(std::string_view text) {
  size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

bool IsNullLabel(const std::string& cell) {
  const std::string t = Lower(Trim(cell));
  return t.empty() || t == "nan" || t == "none" || t == "null" || t == "[]";
}

bool HasExcludedLabel(const std::string& cell) {
  const std::string t = Lower(cell);
  return t.find("suboptimal study") != std::string::npos ||
         t.find("exclude") != std::string::npos ||
         t.find("unchanged") != std::string::npos;
}

// "effusion" is reported as "pleural effusion" in PadChest; subtypes such as
// "lobar atelectasis" end with the class keyword.
bool TokenMatchesClass(const std::string& token, const std::string& cls) {
  const std::string keyword = cls == "effusion" ? "pleural effusion" : cls;
  if (token == keyword) return true;
  return token.size() > keyword.size() &&
         token.compare(token.size() - keyword.size(), keyword.size(),
                       keyword) == 0 &&
         token[token.size() - keyword.size() - 1] == ' ';
}

std::string Stem(const std::string& file) {
  const size_t dot = file.rfind('.');
  return dot == std::string::npos ? file : file.substr(0, dot);
}

}  // namespace

CsvTable JoinMaskQuality(const CsvTable& metadata, const CsvTable& chexmask) {
  const size_t meta_id = metadata.RequireColumn("ImageID");
  const size_t mask_id = chexmask.RequireColumn("ImageID");
  const size_t quality = chexmask.RequireColumn(kMaskQualityColumn);
  std::map<std::string, std::string> by_id;
  for (const auto& row : chexmask.rows) by_id[row[mask_id]] = row[quality];
  CsvTable out = metadata;
  if (out.Column(kMaskQualityColumn)) {
    Fail(ErrorCode::kSchemaError, "metadata already carries a mask quality column");
  }
  out.header.emplace_back(kMaskQualityColumn);
  for (auto& row : out.rows) {
    auto it = by_id.find(row[meta_id]);
    row.push_back(it == by_id.end() ? "" : it->second);
  }
  return out;
}

CsvTable FilterChestRows(const CsvTable& joined,
                         const ChestFilterOptions& options) {
  joined.RequireColumn("ImageID");
  const size_t proj = joined.RequireColumn("Projection");
  const size_t labels = joined.RequireColumn("Labels");
  const size_t quality = joined.RequireColumn(kMaskQualityColumn);
  CsvTable out;
  out.header = joined.header;
  for (const auto& row : joined.rows) {
    if (Trim(row[proj]) == "L") continue;
    if (IsNullLabel(row[labels]) || HasExcludedLabel(row[labels])) continue;
    const std::string q = Trim(row[quality]);
    if (q.empty()) continue;  // no mask available
    const double value = ParseDouble(q);
    if (!(value > options.min_mask_quality)) continue;
    out.rows.push_back(row);
  }
  return out;
}

DatasetManifest BuildChestManifest(const CsvTable& filtered,
                                   const ChestFilterOptions& options) {
  const size_t id = filtered.RequireColumn("ImageID");
  const size_t proj = filtered.RequireColumn("Projection");
  const size_t labels = filtered.RequireColumn("Labels");
  const size_t quality = filtered.RequireColumn(kMaskQualityColumn);
  const auto birth = filtered.Column("PatientBirth");
  const auto sex = filtered.Column("PatientSex_DICOM");
  const auto patient = filtered.Column("PatientID");

  DatasetManifest manifest;
  manifest.name = "padchest";
  manifest.class_names = options.class_names;
  manifest.task = options.class_names.size() == 1 ? TaskKind::kBinary
                                                  : TaskKind::kMultiLabel;
  for (const auto& row : filtered.rows) {
    Sample s;
    s.image_id = Stem(row[id]);
    s.image_path = "images/" + row[id];
    s.mask_path = "masks/" + s.image_id + ".png";
    s.mask_quality = ParseDouble(Trim(row[quality]));
    s.metadata.projection = ParseProjection(Trim(row[proj]));
    if (birth) {
      const std::string b = Trim(row[*birth]);
      if (!b.empty() && Lower(b) != "nan") {
        s.metadata.birth_year = static_cast<int>(std::lround(ParseDouble(b)));
      }
    }
    if (sex) {
      const std::string v = Trim(row[*sex]);
      if (!v.empty() && Lower(v) != "nan") s.metadata.sex = v;
    }
    if (patient) {
      const std::string v = Trim(row[*patient]);
      if (!v.empty()) s.metadata.patient_id = v;
    }
    const std::vector<std::string> tokens = ParsePadchestLabels(row[labels]);
    for (const auto& cls : options.class_names) {
      const bool positive =
          std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
            return TokenMatchesClass(t, cls);
          });
      s.labels.push_back(positive ? 1 : 0);
    }
    manifest.samples.push_back(std::move(s));
  }
  manifest.Validate();
  return manifest;
}

DatasetManifest FilterChestManifest(const CsvTable& joined,
                                    const ChestFilterOptions& options) {
  return BuildChestManifest(FilterChestRows(joined, options), options);
}

std::vector<std::string> ParsePadchestLabels(std::string_view cell) {
  std::string body = Trim(cell);
  if (!body.empty() && body.front() == '[') body.erase(0, 1);
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::vector<std::string> out;
  std::stringstream ss(body);
  std::string token;
  while (std::getline(ss, token, ',')) {
    std::string t = Trim(token);
    while (!t.empty() && (t.front() == '\'' || t.front() == '"')) t.erase(0, 1);
    while (!t.empty() && (t.back() == '\'' || t.back() == '"')) t.pop_back();
    t = Lower(Trim(t));
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

BinaryMask DecodeRle(std::string_view rle, int height, int width) {
  if (height <= 0 || width <= 0) {
    Fail(ErrorCode::kInvalidArgument, "RLE mask needs positive dimensions");
  }
  const size_t total = static_cast<size_t>(height) * width;
  std::vector<uint8_t> pixels(total, 0);
  std::stringstream ss{std::string(rle)};
  long long start = 0, length = 0;
  while (ss >> start) {
    if (!(ss >> length)) {
      Fail(ErrorCode::kSchemaError, "RLE string has an odd number of values");
    }
    if (start < 1 || length < 0 ||
        static_cast<size_t>(start - 1 + length) > total) {
      Fail(ErrorCode::kSchemaError, "RLE run exceeds the mask bounds");
    }
    std::fill_n(pixels.begin() + (start - 1), length, 1);
  }
  if (!ss.eof()) Fail(ErrorCode::kSchemaError, "malformed RLE string");
  return BinaryMask(height, width, std::move(pixels));
}

std::string EncodeRle(const BinaryMask& mask) {
  std::string out;
  const auto px = mask.pixels();
  size_t i = 0;
  while (i < px.size()) {
    if (!px[i]) {
      ++i;
      continue;
    }
    size_t j = i;
    while (j < px.size() && px[j]) ++j;
    if (!out.empty()) out.push_back(' ');
    out += std::to_string(i + 1) + " " + std::to_string(j - i);
    i = j;
  }
  return out;
}

BinaryMask ChexmaskLungMask(const CsvTable& chexmask, size_t row) {
  const auto& r = chexmask.rows.at(row);
  const int h = static_cast<int>(ParseInt(Trim(r[chexmask.RequireColumn("Height")])));
  const int w = static_cast<int>(ParseInt(Trim(r[chexmask.RequireColumn("Width")])));
  const BinaryMask left = DecodeRle(r[chexmask.RequireColumn("Left Lung")], h, w);
  const BinaryMask right = DecodeRle(r[chexmask.RequireColumn("Right Lung")], h, w);
  std::vector<uint8_t> px(left.pixels().begin(), left.pixels().end());
  for (size_t i = 0; i < px.size(); ++i) px[i] |= right.pixels()[i];
  return BinaryMask(h, w, std::move(px));
}

}  // namespace maskaudit
