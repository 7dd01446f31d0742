#pragma once

// Minimal RFC 4180 CSV: LF line endings on write; CRLF or LF accepted on read.

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmcm::csv {

std::string escape(std::string_view field);
std::string row(std::span<const std::string> fields);
std::string row(std::initializer_list<std::string> fields);

/// Throws ParseError on an unterminated quoted field.
std::vector<std::vector<std::string>> parse(std::string_view text);

}  // namespace mmcm::csv
