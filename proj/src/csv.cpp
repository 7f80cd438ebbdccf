//===-- csv.cpp ----------------------------------------------------------===//
//
//                        The VeriModel Toolkit
//
// This file is distributed under the MIT License. See LICENSE for details.
//
//===----------------------------------------------------------------------===//

#include "verimodel/csv.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "verimodel/errors.hpp"

namespace verimodel {

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw ConfigError("CSV has no column named '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header) {
    if (h == name) return true;
  }
  return false;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

}  // namespace

CsvTable csv_from_string(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line.substr(1));
      continue;
    }
    if (!header_seen) {
      table.header = split_fields(line);
      header_seen = true;
    } else {
      auto fields = split_fields(line);
      if (fields.size() != table.header.size()) {
        throw ConfigError("CSV row has " + std::to_string(fields.size()) +
                          " fields, header has " +
                          std::to_string(table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return csv_from_string(ss.str());
}

std::string csv_to_string(const CsvTable& table) {
  std::string out;
  for (const auto& c : table.comments) {
    out += "#" + c + "\n";
  }
  auto join = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += fields[i];
    }
    out += '\n';
  };
  join(table.header);
  for (const auto& row : table.rows) join(row);
  return out;
}

void write_text_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  fs::path target(path);
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path());
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + tmp.string());
    out << text;
  }
  fs::rename(tmp, target);
}

void write_csv(const std::string& path, const CsvTable& table) {
  write_text_atomic(path, csv_to_string(table));
}

std::string format_number(double v) {
  // nlohmann emits the shortest decimal that round-trips.
  return nlohmann::json(v).dump();
}

std::string format_number(std::int64_t v) { return std::to_string(v); }

}  // namespace verimodel
