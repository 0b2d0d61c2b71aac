#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace treeval {

/// Shortest decimal string that reads back to exactly the same double.
std::string format_double(double v);

/// 64-bit FNV-1a digest, rendered as 16 lowercase hex digits by hex64().
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ull);
std::string hex64(std::uint64_t v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Minimal CSV table: header plus rows of raw fields. No quoting support;
/// every file this library writes is purely numeric apart from labels
/// without commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace treeval
