#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace cbcomm {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_file(const fs::path& path);

// Writes via a sibling temp file and rename(2), so readers never observe a
// partially written artifact.
void write_file_atomic(const fs::path& path, std::string_view contents);

std::vector<json> read_jsonl(const fs::path& path);
std::string to_jsonl(const std::vector<json>& rows);

// Shortest representation that round-trips to the same double.
std::string format_real(double v);

// Minimal RFC-4180 style CSV: quoted fields, embedded commas and quotes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  int column(std::string_view name) const;
};

CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const fs::path& path);
std::string csv_escape(std::string_view field);
std::string to_csv(const CsvTable& table);

// Hex SHA-256 of a byte string / file.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const fs::path& path);

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace cbcomm
