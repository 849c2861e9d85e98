// Copyright 2026 The weakiqa Authors
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

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

// Minimal RFC 4180 reader/writer used by the manifest, score and ratings files.
namespace iqa::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Throws ErrorCode::kValidation naming the missing column.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

Table read(const std::filesystem::path& path);
Table parse(std::string_view text, std::string_view source_name = "<memory>");
void write(const Table& table, const std::filesystem::path& path);
std::string format(const Table& table);

// Shortest round-trip decimal; +inf/-inf as "inf"/"-inf".
std::string format_double(double v);
// Accepts the format_double output. `context` is used in error messages.
double parse_double(std::string_view text, std::string_view context);
long long parse_int(std::string_view text, std::string_view context);

}  // namespace iqa::csv
