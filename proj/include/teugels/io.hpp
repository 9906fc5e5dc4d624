#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace teugels {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Shortest-safe text for a double: 17 significant digits, '.' separator.
std::string format_real(double v);

using CsvField = std::variant<std::string, double, long long>;

/// RFC 4180 writer: CRLF records, fields quoted only when needed.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(&out) {}
    void header(const std::vector<std::string>& names);
    void row(const std::vector<CsvField>& fields);

private:
    std::ostream* out_;
};

std::string csv_escape(const std::string& s);

/// Write bytes to path (creating parent directories) and return their checksum.
std::uint64_t write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

} // namespace teugels
