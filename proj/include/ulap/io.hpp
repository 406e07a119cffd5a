#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ulap/errors.hpp"

// Small IO helpers: shortest round-trip double formatting, FNV-1a hashing of
// config bytes, and atomic whole-file writes (temp file plus rename) so a
// crashed run never leaves a truncated artifact.

namespace ulap {

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

class CsvWriter {
 public:
  explicit CsvWriter(std::string header) { rows_.push_back(std::move(header)); }

  void add_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) row += ",";
      row += cells[i];
    }
    rows_.push_back(std::move(row));
  }

  std::size_t n_rows() const { return rows_.size() - 1; }

  std::string str() const {
    std::string out;
    for (const std::string& r : rows_) {
      out += r;
      out += "\n";
    }
    return out;
  }

 private:
  std::vector<std::string> rows_;
};

}  // namespace ulap
