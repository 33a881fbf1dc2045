#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace hrs::io {

// Shortest round-trip decimal representation; identical bytes for identical
// doubles on every run.
std::string format_double(double value);

using Cell = std::variant<double, std::int64_t, std::string>;

// Column-oriented artifact that can be emitted either as CSV or as a JSON
// array of row objects.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void add_row(std::vector<Cell> row);
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }

  std::string to_csv() const;
  nlohmann::ordered_json to_json() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

enum class TableFormat { csv, json };

TableFormat parse_table_format(std::string_view name);
std::string_view extension(TableFormat format);

// Writes `text` to `path`, creating parent directories.
void write_text(const std::filesystem::path& path, std::string_view text);
// Writes the table as <stem>.csv or <stem>.json; returns the path written.
std::filesystem::path write_table(const std::filesystem::path& dir, std::string_view stem,
                                  const Table& table, TableFormat format);
std::filesystem::path write_json(const std::filesystem::path& dir, std::string_view stem,
                                 const nlohmann::ordered_json& doc);

// 64-bit FNV-1a, rendered as 16 hex digits.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);
std::string file_hash(const std::filesystem::path& path);

// JSON number that survives serialization; non-finite values become strings.
nlohmann::ordered_json number(double value);

}  // namespace hrs::io
