// Copyright 2026 The qstream Authors
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

#ifndef QSTREAM_CSV_HPP_
#define QSTREAM_CSV_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qstream {

// Shortest decimal form that parses back to the identical double; '.' as the
// decimal separator regardless of locale.
std::string format_number(double value);
std::string format_number(std::int64_t value);
double parse_number(std::string_view text);

// Plain numeric table. No quoting: cells never contain separators.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  // Index of `name` in the header; throws FormatError when absent.
  std::size_t column(std::string_view name) const;
  double number(std::size_t row, std::string_view name) const;
};

// UTF-8, LF line endings, header first. Written via a temporary file and
// renamed into place. Throws IoError with the path on failure.
void write_csv(const std::filesystem::path& path, const CsvTable& table);
std::string to_csv_string(const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text);

}  // namespace qstream

#endif  // QSTREAM_CSV_HPP_
