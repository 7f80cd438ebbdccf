//===-- csv.hpp - CSV reading and atomic writing ----------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace verimodel {

// Comma separation, '.' decimal point, LF line endings, UTF-8. Lines
// starting with '#' are comments (used to record seeds) and are preserved
// ahead of the header.
struct CsvTable {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;  // throws if missing
  bool has_column(const std::string& name) const;
};

CsvTable csv_from_string(const std::string& text);
CsvTable read_csv(const std::string& path);
std::string csv_to_string(const CsvTable& table);

// Atomic write: temp file in the same directory, then rename.
void write_csv(const std::string& path, const CsvTable& table);
void write_text_atomic(const std::string& path, const std::string& text);

// Shortest round-trip decimal formatting (integers print without a point).
std::string format_number(double v);
std::string format_number(std::int64_t v);

}  // namespace verimodel
