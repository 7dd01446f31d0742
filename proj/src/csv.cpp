#include "mmcm/csv.hpp"

#include "mmcm/error.hpp"

namespace mmcm::csv {

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string row(std::span<const std::string> fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += escape(fields[i]);
  }
  line += '\n';
  return line;
}

std::string row(std::initializer_list<std::string> fields) {
  return row(std::span<const std::string>(fields.begin(), fields.size()));
}

std::vector<std::vector<std::string>> parse(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> current;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    switch (ch) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        current.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        current.push_back(std::move(field));
        field.clear();
        rows.push_back(std::move(current));
        current.clear();
        field_started = false;
        break;
      default:
        field += ch;
        field_started = true;
    }
  }
  if (quoted) fail(ErrorCode::ParseError, "unterminated quoted CSV field");
  if (field_started || !current.empty()) {
    current.push_back(std::move(field));
    rows.push_back(std::move(current));
  }
  return rows;
}

}  // namespace mmcm::csv
