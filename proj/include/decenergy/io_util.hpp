#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace decenergy {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Full-match parse; throws InvalidInput with `what` in the message.
double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

// Splits one CSV line on commas. Quoting is not supported; the schema
// forbids commas and quotes inside fields.
std::vector<std::string_view> split_csv_line(std::string_view line);

std::string read_text_file(const std::filesystem::path& path);

// Writes through a sibling temporary file and renames it into place, so a
// failing writer never leaves a partial output behind.
void write_file_atomically(const std::filesystem::path& path,
                           const std::function<void(std::ostream&)>& writer);

}  // namespace decenergy
