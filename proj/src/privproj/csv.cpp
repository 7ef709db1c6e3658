#include "privproj/csv.hpp"

#include <fmt/format.h>

#include "privproj/error.hpp"

namespace privproj::csv {

std::optional<std::vector<std::string>> Reader::next() {
  int ch = in_.get();
  if (ch == std::char_traits<char>::eof()) return std::nullopt;

  record_line_ = line_;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool after_quote = false;

  for (;; ch = in_.get()) {
    if (ch == std::char_traits<char>::eof()) {
      if (quoted)
        fail(ErrorCode::ParseError, fmt::format("line {}: unterminated quoted field", record_line_));
      break;
    }
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in_.peek() == '"') {
          field += '"';
          in_.get();
        } else {
          quoted = false;
          after_quote = true;
        }
      } else {
        if (c == '\n') ++line_;
        field += c;
      }
      continue;
    }
    if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      after_quote = false;
    } else if (c == '\r' && in_.peek() == '\n') {
      continue;
    } else if (c == '\n') {
      ++line_;
      break;
    } else if (c == '"' && field.empty() && !after_quote) {
      quoted = true;
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string quote_if_needed(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote_if_needed(fields[i]);
  }
  return out;
}

}  // namespace privproj::csv
