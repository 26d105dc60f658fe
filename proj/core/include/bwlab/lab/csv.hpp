#pragma once

#include <charconv>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>

namespace bwlab::lab {

// 17 significant digits: lossless for doubles.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// Shortest round-trip form, for labels.
inline std::string format_short(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Minimal CSV writer: one header row, then rows of numbers or plain tokens.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::initializer_list<std::string_view> header) : os_(os) {
    row_begin();
    for (auto h : header) cell(h);
    row_end();
  }

  CsvWriter& cell(double v) { return raw(format_double(v)); }
  CsvWriter& cell(std::int64_t v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::uint64_t v) { return raw(std::to_string(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(std::string_view s) { return raw(s); }
  CsvWriter& cell(const char* s) { return raw(s); }

  void row_end() {
    os_ << '\n';
    first_ = true;
  }

 private:
  void row_begin() { first_ = true; }
  CsvWriter& raw(std::string_view s) {
    if (!first_) os_ << ',';
    os_ << s;
    first_ = false;
    return *this;
  }

  std::ostream& os_;
  bool first_ = true;
};

}  // namespace bwlab::lab
