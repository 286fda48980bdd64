#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace greenwave {

// Shortest decimal form that round-trips the exact double. Keeps reruns
// byte-identical regardless of locale or printf quirks.
inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_number: to_chars failed");
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::uint64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(std::int64_t v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_number(int v) { return format_number(static_cast<std::int64_t>(v)); }

// Minimal cell type for heterogeneous rows.
struct CsvCell {
  std::string text;
  CsvCell(const char* s) : text(s) {}
  CsvCell(const std::string& s) : text(s) {}
  CsvCell(double v) : text(format_number(v)) {}
  CsvCell(int v) : text(format_number(v)) {}
  CsvCell(std::int64_t v) : text(format_number(v)) {}
  CsvCell(std::uint64_t v) : text(format_number(v)) {}
  CsvCell(bool v) : text(v ? "1" : "0") {}
};

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw std::runtime_error("CsvWriter: cannot open " + path);
    write_fields(header);
  }

  void row(const std::vector<CsvCell>& cells) {
    std::vector<std::string> fields;
    fields.reserve(cells.size());
    for (const auto& c : cells) fields.push_back(c.text);
    write_fields(fields);
  }

 private:
  void write_fields(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
  }

  std::ofstream out_;
};

}  // namespace greenwave
