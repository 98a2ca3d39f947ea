#ifndef STMMC_IO_HPP
#define STMMC_IO_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace stmmc {

/// A delimited text file: header plus data rows, with source line numbers for error messages.
struct Table {
    std::string path;
    char delimiter = ',';
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
};

/// Reads a CSV or TSV file. The delimiter is a tab if the header line contains one, else a comma.
/// Blank lines are skipped; a trailing '\r' is stripped.
Table read_table(const std::filesystem::path& path);

/// Parses a decimal real; throws DataError mentioning `context` on failure.
double parse_real(std::string_view field, const std::string& context);

/// Shortest decimal representation that round-trips exactly.
std::string format_real(double value);

std::string read_text_file(const std::filesystem::path& path);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace stmmc

#endif
