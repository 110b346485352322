#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "longmt/errors.hpp"

namespace longmt::jsonl {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// One JSON value per non-blank line. A malformed line is an error, not a
// skip: pipeline files are machine-written and silence would hide bugs.
inline std::vector<nlohmann::json> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool blank = true;
    for (char c : line) {
      if (c != ' ' && c != '\t') {
        blank = false;
        break;
      }
    }
    if (blank) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) +
                    ": malformed JSONL line: " + e.what());
    }
  }
  return out;
}

inline std::string dump_line(const nlohmann::json& j) { return j.dump() + "\n"; }

// Writes content to a temp file next to the target and renames it into
// place, so readers never observe a half-written file.
inline void atomic_write_text(const std::filesystem::path& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

inline void atomic_write_lines(const std::filesystem::path& path,
                               const std::vector<std::string>& lines) {
  std::string content;
  std::size_t total = 0;
  for (const auto& l : lines) total += l.size();
  content.reserve(total);
  for (const auto& l : lines) content += l;
  atomic_write_text(path, content);
}

// Append-only writer used for audit logs; flushes after every record so an
// interrupted run keeps everything it paid for.
class AppendWriter {
 public:
  explicit AppendWriter(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path.parent_path(), ec);
    }
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot open file for appending: " + path.string());
  }

  void write_line(const std::string& line) {
    out_ << line;
    if (line.empty() || line.back() != '\n') out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

}  // namespace longmt::jsonl
