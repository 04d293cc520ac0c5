#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ssa::csv {

struct Row {
  std::size_t line;  // 1-based physical line where the row starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line endings.
/// Blank lines are skipped. Throws Error(kFormatError) on an unterminated
/// quote or a stray quote inside an unquoted field.
std::vector<Row> parse(std::string_view text);

std::string read_all(std::istream& in);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace ssa::csv
