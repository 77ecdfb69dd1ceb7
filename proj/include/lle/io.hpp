#ifndef LLE_IO_HPP
#define LLE_IO_HPP

#include "lle/types.hpp"

#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace lle {

enum class MatrixFormat { csv, json };

namespace io {

/// Shortest form that is still 17 significant digits, "%.17g" semantics.
inline std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    if (ec != std::errc{}) {
        throw Error("failed to format floating point value");
    }
    return std::string(buf, end);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline bool parse_double(std::string_view cell, double& out) {
    cell = trim(cell);
    if (!cell.empty() && cell.front() == '+') {
        cell.remove_prefix(1);
    }
    if (cell.empty()) {
        return false;
    }
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc{} && ptr == cell.data() + cell.size() && std::isfinite(out);
}

} // namespace detail

/* Parses comma-separated numeric text. Rows are file lines (LF or CRLF);
 * error messages use 1-based file line and column numbers. A trailing
 * newline at end of file is allowed; any other blank line is an error. */
inline Matrix parse_csv(std::string_view text, bool has_header, const std::string& source = "<memory>") {
    std::vector<std::string_view> lines;
    for (std::size_t start = 0; start < text.size();) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }

    std::size_t first = has_header ? 1 : 0;
    if (lines.size() <= first) {
        throw FormatError(source + ": no data rows");
    }

    std::vector<double> values;
    std::size_t columns = 0;
    std::size_t rows = 0;
    for (std::size_t li = first; li < lines.size(); ++li) {
        const std::string_view line = detail::trim(lines[li]);
        const std::size_t row_number = li + 1;
        if (line.empty()) {
            throw FormatError(source + ": row " + std::to_string(row_number) + " is empty");
        }
        std::size_t col = 0;
        for (std::size_t start = 0;;) {
            std::size_t comma = line.find(',', start);
            const bool last = comma == std::string_view::npos;
            const std::string_view cell = line.substr(start, last ? std::string_view::npos : comma - start);
            double value = 0.0;
            if (!detail::parse_double(cell, value)) {
                throw FormatError(source + ": non-numeric cell at row " + std::to_string(row_number) + ", column " +
                                  std::to_string(col + 1) + ": '" + std::string(detail::trim(cell)) + "'");
            }
            values.push_back(value);
            ++col;
            if (last) {
                break;
            }
            start = comma + 1;
        }
        if (rows == 0) {
            columns = col;
        } else if (col != columns) {
            throw FormatError(source + ": row " + std::to_string(row_number) + " has " + std::to_string(col) +
                              " columns, expected " + std::to_string(columns));
        }
        ++rows;
    }

    Matrix m(static_cast<Index>(rows), static_cast<Index>(columns));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < columns; ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = values[r * columns + c];
        }
    }
    return m;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Any numeric CSV, including single-row or single-column matrices.
inline Matrix read_csv_matrix(const std::filesystem::path& path, bool has_header) {
    const std::string text = read_file(path);
    if (text.empty()) {
        throw FormatError(path.string() + ": file is empty");
    }
    return parse_csv(text, has_header, path.string());
}

inline DataMatrix load_csv(const std::filesystem::path& path, bool has_header = false) {
    return DataMatrix(read_csv_matrix(path, has_header));
}

inline std::string to_csv(const Matrix& m) {
    std::string out;
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c > 0) {
                out += ',';
            }
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << contents;
    out.close();
    if (!out) {
        throw IoError("failed writing '" + path.string() + "'");
    }
}

inline void save_matrix(const Matrix& m, const std::filesystem::path& path, MatrixFormat format = MatrixFormat::csv) {
    if (format == MatrixFormat::csv) {
        write_file(path, to_csv(m));
    } else {
        write_file(path, to_json(m).dump() + "\n");
    }
}

} // namespace io

using io::load_csv;
using io::save_matrix;

} // namespace lle

#endif
