#include "teugels/io.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>
#include <sstream>

#include "teugels/errors.hpp"

namespace teugels {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

void CsvWriter::header(const std::vector<std::string>& names) {
    std::vector<CsvField> f(names.begin(), names.end());
    row(f);
}

void CsvWriter::row(const std::vector<CsvField>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) *out_ << ',';
        std::visit(
            [this](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::string>)
                    *out_ << csv_escape(v);
                else if constexpr (std::is_same_v<T, double>)
                    *out_ << format_real(v);
                else
                    *out_ << v;
            },
            fields[i]);
    }
    *out_ << "\r\n";
}

std::uint64_t write_file(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw ValidationError("cannot create '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << bytes;
    if (!out) throw ValidationError("write failed for '" + path.string() + "'");
    return fnv1a64(bytes);
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace teugels
