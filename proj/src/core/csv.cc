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

#include "core/csv.h"

#include <charconv>
#include <cmath>
#include <system_error>

#include "core/error.h"
#include "core/file_util.h"

namespace maskaudit {

std::optional<size_t> CsvTable::Column(std::string_view name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

size_t CsvTable::RequireColumn(std::string_view name) const {
  if (auto idx = Column(name)) return *idx;
  Fail(ErrorCode::kSchemaError,
       "missing required column '" + std::string(name) + "'");
}

CsvTable ParseCsv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // Skip blank lines.
    if (!(record.size() == 1 && record[0].empty())) {
      records.push_back(std::move(record));
    }
    record.clear();
  };
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;
  for (; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(ch);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) Fail(ErrorCode::kSchemaError, "unterminated quoted CSV field");
  if (!field.empty() || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front());
  for (size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      Fail(ErrorCode::kSchemaError,
           "CSV row " + std::to_string(r) + " has " +
               std::to_string(records[r].size()) + " fields, header has " +
               std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable ReadCsvFile(const std::filesystem::path& path) {
  return ParseCsv(ReadTextFile(path));
}

namespace {

void AppendField(std::string& out, const std::string& field) {
  const bool quote = field.find_first_of(",\"\n\r") != std::string::npos;
  if (!quote) {
    out += field;
    return;
  }
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
}

void AppendRecord(std::string& out, const std::vector<std::string>& record) {
  for (size_t i = 0; i < record.size(); ++i) {
    if (i) out.push_back(',');
    AppendField(out, record[i]);
  }
  out.push_back('\n');
}

}  // namespace

std::string FormatCsv(const CsvTable& table) {
  std::string out;
  AppendRecord(out, table.header);
  for (const auto& row : table.rows) AppendRecord(out, row);
  return out;
}

void WriteCsvFile(const std::filesystem::path& path, const CsvTable& table) {
  WriteTextFile(path, FormatCsv(table));
}

std::string FormatDouble(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double ParseDouble(std::string_view text) {
  if (text == "nan") return std::nan("");
  if (text == "inf") return INFINITY;
  if (text == "-inf") return -INFINITY;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    Fail(ErrorCode::kSchemaError, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long ParseInt(std::string_view text) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    Fail(ErrorCode::kSchemaError,
         "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace maskaudit
