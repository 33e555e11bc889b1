#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace survfuse::io {

using Row = std::vector<std::string>;

struct CsvTable {
    Row header;
    std::vector<Row> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line where each row starts
};

// RFC 4180 reader: quoted fields may contain commas, doubled quotes and newlines.
// Blank lines are skipped. Throws ValidationError on unterminated quotes.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

// Quotes a field only when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

std::string read_text(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the target. Parent directories are created.
void write_atomic(const std::filesystem::path& path, std::string_view content);

// Whole-string parse; rejects trailing garbage. Non-finite values parse (callers decide).
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace survfuse::io
