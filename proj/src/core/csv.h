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

#ifndef MASKAUDIT_CORE_CSV_H_
#define MASKAUDIT_CORE_CSV_H_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace maskaudit {

// RFC 4180 table: quoted fields may contain commas, quotes ("") and newlines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or nullopt.
  std::optional<size_t> Column(std::string_view name) const;
  // Like Column() but throws kSchemaError naming the missing column.
  size_t RequireColumn(std::string_view name) const;

  bool operator==(const CsvTable&) const = default;
};

CsvTable ParseCsv(std::string_view text);
CsvTable ReadCsvFile(const std::filesystem::path& path);

std::string FormatCsv(const CsvTable& table);
void WriteCsvFile(const std::filesystem::path& path, const CsvTable& table);

// Shortest decimal text that parses back to exactly the same double.
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);
long long ParseInt(std::string_view text);

}  // namespace maskaudit

#endif  // MASKAUDIT_CORE_CSV_H_
