#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace halle {

using json = nlohmann::json;

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place, so readers never
// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

json read_json_file(const std::filesystem::path& path);

// One JSON value per non-blank line. Parse failures report the line number.
std::vector<json> read_jsonl_file(const std::filesystem::path& path);
std::vector<json> parse_jsonl(std::string_view content,
                              std::string_view source_name = "<memory>");

std::string to_jsonl(const std::vector<json>& records);

// Lines with '#' comments and surrounding whitespace removed; blanks dropped.
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace halle
