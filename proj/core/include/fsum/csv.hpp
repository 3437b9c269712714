#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace fsum {

// RFC-4180-style CSV.  Quoted fields may contain commas, doubled quotes and
// newlines; rows are terminated by \n or \r\n.

// Parses CSV text into rows of fields.  Throws DataError on unterminated
// quotes or stray quotes inside unquoted fields.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

// Reads and parses a CSV file.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);

// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

// Writes rows (creating parent directories), one line per row, "\n" endings.
void write_csv(const std::filesystem::path& path,
               const std::vector<std::vector<std::string>>& rows);

// Shortest round-trip decimal form of a double (std::to_chars); the one
// number format used in every emitted artifact so reruns are byte-identical.
std::string format_double(double value);

}  // namespace fsum
