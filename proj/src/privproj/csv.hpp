#pragma once

// Minimal RFC-4180 reader/writer: quoted fields, "" escapes, CRLF or LF.

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace privproj::csv {

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Throws ParseError on an
  /// unterminated quoted field.
  std::optional<std::vector<std::string>> next();

  /// 1-based line number where the last returned record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
  std::size_t record_line_ = 0;
};

std::string quote_if_needed(std::string_view field);
std::string join(const std::vector<std::string>& fields);

}  // namespace privproj::csv
