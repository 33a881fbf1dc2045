#include "hrs/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hrs/error.hpp"
#include "hrs/parallel.hpp"

namespace hrs {
namespace {
unsigned g_worker_threads = 1;
}

unsigned worker_threads() { return g_worker_threads; }
void set_worker_threads(unsigned n) { g_worker_threads = n == 0 ? 1 : n; }

}  // namespace hrs

namespace hrs::io {

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return std::string(buf.data(), end);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw ShapeError("Table::add_row: expected " + std::to_string(columns_.size()) +
                     " cells, got " + std::to_string(row.size()));
  }
  rows_.push_back(std::move(row));
}

namespace {

std::string cell_text(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> std::string {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<V, std::int64_t>) {
          return std::to_string(v);
        } else {
          return v;
        }
      },
      cell);
}

nlohmann::ordered_json cell_json(const Cell& cell) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, double>) {
          return number(v);
        } else {
          return v;
        }
      },
      cell);
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c) out += ',';
    out += columns_[c];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += cell_text(row[c]);
    }
    out += '\n';
  }
  return out;
}

nlohmann::ordered_json Table::to_json() const {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& row : rows_) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) obj[columns_[c]] = cell_json(row[c]);
    doc.push_back(std::move(obj));
  }
  return doc;
}

TableFormat parse_table_format(std::string_view name) {
  if (name == "csv") return TableFormat::csv;
  if (name == "json") return TableFormat::json;
  throw DomainError("unknown table format '" + std::string(name) + "' (expected csv|json)");
}

std::string_view extension(TableFormat format) {
  return format == TableFormat::csv ? ".csv" : ".json";
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw Error("write failed for '" + path.string() + "'");
}

std::filesystem::path write_table(const std::filesystem::path& dir, std::string_view stem,
                                  const Table& table, TableFormat format) {
  auto path = dir / (std::string(stem) + std::string(extension(format)));
  if (format == TableFormat::csv) {
    write_text(path, table.to_csv());
  } else {
    write_text(path, table.to_json().dump(2) + "\n");
  }
  return path;
}

std::filesystem::path write_json(const std::filesystem::path& dir, std::string_view stem,
                                 const nlohmann::ordered_json& doc) {
  auto path = dir / (std::string(stem) + ".json");
  write_text(path, doc.dump(2) + "\n");
  return path;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a(ss.str()));
}

nlohmann::ordered_json number(double value) {
  if (value == 0.0) return 0.0;
  if (std::isfinite(value)) return value;
  return format_double(value);
}

}  // namespace hrs::io
