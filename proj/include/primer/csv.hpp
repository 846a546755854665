#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace primer::csv {

/// Quote a field per RFC 4180 when it contains a comma, quote or newline.
std::string escape(const std::string& field);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

/// Parse a whole CSV document. Handles quoted fields with embedded commas,
/// doubled quotes and newlines; accepts LF and CRLF. Records that are a single
/// empty unquoted field (blank lines) are dropped.
std::vector<std::vector<std::string>> parse(const std::string& text);

std::vector<std::vector<std::string>> parse_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace primer::csv
