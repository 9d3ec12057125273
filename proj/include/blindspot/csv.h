#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace blindspot::csv {

using Record = std::vector<std::string>;

// RFC-4180 parsing: quoted fields may contain commas, doubled quotes and
// line breaks; CRLF and LF line endings are both accepted. Blank lines are
// skipped.
std::vector<Record> parse(std::string_view text);

// Reads and parses a whole file. Throws IoError when it cannot be opened.
std::vector<Record> read_file(const std::string& path);

// Quotes a field only when it needs quoting.
std::string escape(std::string_view field);

void write_record(std::ostream& out, const Record& record);

}  // namespace blindspot::csv
