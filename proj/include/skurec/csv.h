// Copyright 2026 The skurec Authors.
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

#ifndef SKUREC_CSV_H_
#define SKUREC_CSV_H_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace skurec::csv {

// Splits one line; double-quoted fields may contain commas and "" escapes.
std::vector<std::string> SplitLine(std::string_view line);

// Quotes a field when it contains a comma, quote or newline.
std::string QuoteField(std::string_view field);

// Shortest round-trip representation.
std::string FormatNumber(double value);

// Throws InputError on anything but a complete finite number.
double ParseNumber(std::string_view text);
long long ParseInteger(std::string_view text);

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);

  const std::filesystem::path& path() const { return path_; }
  const std::vector<std::string>& header() const { return header_; }
  // Column index by name; throws InputError when absent.
  std::size_t Column(std::string_view name) const;
  // Reads the next non-empty record. Returns false at end of file.
  bool Next(std::vector<std::string>& fields);
  // 1-based line number of the record last returned by Next.
  std::size_t line_number() const { return line_number_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::vector<std::string> header_;
  std::size_t line_number_ = 0;
};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);

  void Row(const std::vector<std::string>& fields);
  void Row(std::initializer_list<std::string> fields);
  // Flushes and throws InputError on a failed stream.
  void Close();

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace skurec::csv

#endif  // SKUREC_CSV_H_
