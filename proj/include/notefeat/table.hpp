#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace notefeat {

inline constexpr const char* kKeyColumns[3] = {"file_id", "window_start", "window_end"};

struct TableRow {
    std::string file_id;
    long long window_start = 0; // 0 = whole score
    long long window_end = 0;
    std::vector<double> values;  // aligned with FeatureTable::columns
};

// Rows keyed by (file_id, window); feature columns hold doubles, NaN for
// non-computable cells.
struct FeatureTable {
    std::vector<std::string> columns; // feature columns; keys are implicit
    std::vector<TableRow> rows;

    std::size_t column_index(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        throw std::out_of_range("no such column: " + std::string(name));
    }
    bool has_column(std::string_view name) const {
        return std::any_of(columns.begin(), columns.end(),
                           [&](const std::string& c) { return c == name; });
    }
};

struct CsvError : std::runtime_error {
    long long line;
    CsvError(const std::string& msg, long long line_no)
        : std::runtime_error(msg + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

namespace csv_detail {

inline bool needs_quoting(std::string_view field) {
    return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

inline void write_field(std::string& out, std::string_view field) {
    if (!needs_quoting(field)) { out += field; return; }
    out += '"';
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
}

// 17 significant digits, trailing zeros trimmed: round-trip exact
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// RFC 4180 records; quoted fields may contain separators and newlines
struct RecordReader {
    std::string_view s;
    std::size_t pos = 0;
    long long line = 1;

    bool done() const { return pos >= s.size(); }

    std::vector<std::string> next_record() {
        std::vector<std::string> fields;
        std::string field;
        bool in_quotes = false;
        while (pos < s.size()) {
            char c = s[pos];
            if (in_quotes) {
                if (c == '"') {
                    if (pos + 1 < s.size() && s[pos + 1] == '"') { field += '"'; pos += 2; continue; }
                    in_quotes = false;
                    ++pos;
                    continue;
                }
                if (c == '\n') ++line;
                field += c;
                ++pos;
                continue;
            }
            if (c == '"') { in_quotes = true; ++pos; continue; }
            if (c == ',') { fields.push_back(std::move(field)); field.clear(); ++pos; continue; }
            if (c == '\r') { ++pos; continue; }
            if (c == '\n') {
                ++pos;
                ++line;
                fields.push_back(std::move(field));
                return fields;
            }
            field += c;
            ++pos;
        }
        fields.push_back(std::move(field));
        return fields;
    }
};

} // namespace csv_detail

// UTF-8 CSV with header; columns are file_id, window_start, window_end, then
// feature names in lexicographic order. NaN cells render as empty fields.
inline void write_csv(const FeatureTable& table, const std::filesystem::path& out_path) {
    std::vector<std::size_t> order(table.columns.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return table.columns[a] < table.columns[b];
    });

    std::string out;
    out += "file_id,window_start,window_end";
    for (std::size_t i : order) {
        out += ',';
        csv_detail::write_field(out, table.columns[i]);
    }
    out += '\n';

    for (const auto& row : table.rows) {
        csv_detail::write_field(out, row.file_id);
        out += ',';
        out += std::to_string(row.window_start);
        out += ',';
        out += std::to_string(row.window_end);
        for (std::size_t i : order) {
            out += ',';
            double v = i < row.values.size() ? row.values[i]
                                             : std::numeric_limits<double>::quiet_NaN();
            if (!std::isnan(v)) out += csv_detail::format_double(v);
        }
        out += '\n';
    }

    std::ofstream f(out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + out_path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw std::runtime_error("write failed: " + out_path.string());
}

inline FeatureTable read_csv_text(std::string_view text, const std::string& name) {
    csv_detail::RecordReader reader{text};
    if (reader.done()) throw CsvError("empty file: " + name, 1);

    auto header = reader.next_record();
    long long file_id_col = -1, ws_col = -1, we_col = -1;
    std::vector<long long> feature_cols;
    FeatureTable table;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "file_id" && file_id_col < 0) file_id_col = static_cast<long long>(i);
        else if (header[i] == "window_start" && ws_col < 0) ws_col = static_cast<long long>(i);
        else if (header[i] == "window_end" && we_col < 0) we_col = static_cast<long long>(i);
        else {
            feature_cols.push_back(static_cast<long long>(i));
            table.columns.push_back(header[i]);
        }
    }
    if (file_id_col < 0 || ws_col < 0 || we_col < 0)
        throw CsvError("header must contain file_id, window_start, window_end", 1);

    while (!reader.done()) {
        long long record_line = reader.line;
        auto fields = reader.next_record();
        if (fields.size() == 1 && fields[0].empty()) continue; // trailing newline
        if (fields.size() != header.size())
            throw CsvError("expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()),
                           record_line);
        TableRow row;
        row.file_id = fields[static_cast<std::size_t>(file_id_col)];
        auto parse_ll = [&](const std::string& s, const char* what) {
            long long v = 0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size())
                throw CsvError(std::string("bad ") + what + ": '" + s + "'", record_line);
            return v;
        };
        row.window_start = parse_ll(fields[static_cast<std::size_t>(ws_col)], "window_start");
        row.window_end = parse_ll(fields[static_cast<std::size_t>(we_col)], "window_end");
        for (long long ci : feature_cols) {
            const std::string& cell = fields[static_cast<std::size_t>(ci)];
            if (cell.empty()) {
                row.values.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            double v = 0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || p != cell.data() + cell.size())
                throw CsvError("bad numeric cell '" + cell + "'", record_line);
            row.values.push_back(v);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline FeatureTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return read_csv_text(text, path.string());
}

// NaN-aware cell equality over matching column names; row order must agree.
inline bool tables_equal(const FeatureTable& a, const FeatureTable& b) {
    if (a.rows.size() != b.rows.size()) return false;
    std::vector<std::string> ca = a.columns, cb = b.columns;
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    if (ca != cb) return false;
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        const auto& ra = a.rows[r];
        const auto& rb = b.rows[r];
        if (ra.file_id != rb.file_id || ra.window_start != rb.window_start ||
            ra.window_end != rb.window_end)
            return false;
        for (const auto& name : ca) {
            double va = ra.values[a.column_index(name)];
            double vb = rb.values[b.column_index(name)];
            bool both_nan = std::isnan(va) && std::isnan(vb);
            if (!both_nan && va != vb) return false;
        }
    }
    return true;
}

} // namespace notefeat
