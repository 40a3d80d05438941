#include "halle/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "halle/error.hpp"
#include "halle/text.hpp"

namespace halle {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &length,
                 EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInternal, "SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kInputParse, "cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ostringstream suffix;
  suffix << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id())
         << "." << counter.fetch_add(1);
  std::filesystem::path tmp = path;
  tmp += suffix.str();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorCode::kInternal, "cannot write " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      throw Error(ErrorCode::kInternal, "short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

json read_json_file(const std::filesystem::path& path) {
  std::string content = read_file(path);
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInputParse, path.string() + ": " + e.what());
  }
}

std::vector<json> parse_jsonl(std::string_view content,
                              std::string_view source_name) {
  std::vector<json> records;
  std::size_t line_no = 0;
  for (const auto& line : split(content, '\n')) {
    ++line_no;
    auto body = trim(line);
    if (body.empty()) continue;
    try {
      records.push_back(json::parse(body));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kInputParse, std::string(source_name) + ":" +
                                              std::to_string(line_no) + ": " +
                                              e.what());
    }
  }
  return records;
}

std::vector<json> read_jsonl_file(const std::filesystem::path& path) {
  return parse_jsonl(read_file(path), path.string());
}

std::string to_jsonl(const std::vector<json>& records) {
  std::string out;
  for (const auto& record : records) {
    out += record.dump();
    out += '\n';
  }
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::vector<std::string> lines;
  for (const auto& raw : split(read_file(path), '\n')) {
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (!line.empty()) lines.emplace_back(line);
  }
  return lines;
}

}  // namespace halle
