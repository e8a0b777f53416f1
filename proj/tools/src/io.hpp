#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace paultrap::cli {

using Json = nlohmann::ordered_json;

/// Shortest text that parses back to the same double; "nan", "inf", "-inf" otherwise.
std::string format_double(double v);

/// Comma-separated table with a header row and '\n' line endings.
class CsvWriter {
 public:
  using Cell = std::variant<double, std::int64_t, std::uint64_t, bool, std::string>;

  explicit CsvWriter(std::vector<std::string> columns);
  void row(std::initializer_list<Cell> cells);
  void row(const std::vector<Cell>& cells);
  const std::string& str() const { return text_; }
  std::size_t rows() const { return rows_; }

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

/// Two-space indented JSON followed by a newline.
std::string dump_json(const Json& j);

/// Non-finite numbers become null.
Json json_number(double v);

/// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

/// Output directory that remembers each file it writes and its SHA-256.
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path dir);
  void write(const std::string& name, std::string_view content);
  void write_json(const std::string& name, const Json& j) { write(name, dump_json(j)); }
  const std::filesystem::path& path() const { return dir_; }
  /// (file name, sha256) in write order.
  const std::vector<std::pair<std::string, std::string>>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> written_;
};

}  // namespace paultrap::cli
