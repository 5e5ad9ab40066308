#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "notefeat/table.hpp"
#include "notefeat/text.hpp"

namespace notefeat {

struct NanFilterReport {
    double r = 0;                        // NaN-free column count / row count
    std::vector<long long> n;            // per-row NaN counts, original order
    bool row_filter_ran = false;
    double q99 = std::numeric_limits<double>::quiet_NaN();      // nearest-rank 99% quantile of n
    double threshold = std::numeric_limits<double>::quiet_NaN(); // q99 / 0.99
    std::vector<std::size_t> rows_removed;        // original row indices
    std::vector<std::string> columns_removed;
};

// Heuristic: r = (#columns without NaN) / (#rows). When r < 0.1, rows whose
// NaN count exceeds q99/0.99 are removed, where q99 is the nearest-rank 99%
// quantile of the per-row NaN counts; at most 1% of rows can cross that
// threshold. Afterwards every column still containing a NaN is dropped, so
// the output is NaN-free.
inline std::pair<FeatureTable, NanFilterReport> nan_filter(const FeatureTable& table) {
    if (table.rows.empty()) throw std::invalid_argument("nan_filter: empty table");

    const std::size_t rows = table.rows.size();
    const std::size_t cols = table.columns.size();
    NanFilterReport report;

    std::vector<long long> col_nan(cols, 0);
    report.n.assign(rows, 0);
    for (std::size_t ri = 0; ri < rows; ++ri)
        for (std::size_t ci = 0; ci < cols; ++ci)
            if (std::isnan(table.rows[ri].values[ci])) {
                ++report.n[ri];
                ++col_nan[ci];
            }

    long long clean_cols = 0;
    for (std::size_t ci = 0; ci < cols; ++ci)
        if (col_nan[ci] == 0) ++clean_cols;
    report.r = static_cast<double>(clean_cols) / static_cast<double>(rows);

    std::vector<bool> row_kept(rows, true);
    if (report.r < 0.1) {
        report.row_filter_ran = true;
        std::vector<long long> sorted = report.n;
        std::sort(sorted.begin(), sorted.end());
        std::size_t rank = static_cast<std::size_t>(
            std::ceil(0.99 * static_cast<double>(rows))); // 1-based nearest rank
        rank = std::clamp<std::size_t>(rank, 1, rows);
        report.q99 = static_cast<double>(sorted[rank - 1]);
        report.threshold = report.q99 / 0.99;
        for (std::size_t ri = 0; ri < rows; ++ri)
            if (static_cast<double>(report.n[ri]) > report.threshold) {
                row_kept[ri] = false;
                report.rows_removed.push_back(ri);
            }
    }

    // drop every column that still contains a NaN among the retained rows
    std::vector<bool> col_kept(cols, true);
    for (std::size_t ci = 0; ci < cols; ++ci)
        for (std::size_t ri = 0; ri < rows; ++ri)
            if (row_kept[ri] && std::isnan(table.rows[ri].values[ci])) {
                col_kept[ci] = false;
                report.columns_removed.push_back(table.columns[ci]);
                break;
            }

    FeatureTable out;
    for (std::size_t ci = 0; ci < cols; ++ci)
        if (col_kept[ci]) out.columns.push_back(table.columns[ci]);
    for (std::size_t ri = 0; ri < rows; ++ri) {
        if (!row_kept[ri]) continue;
        TableRow row;
        row.file_id = table.rows[ri].file_id;
        row.window_start = table.rows[ri].window_start;
        row.window_end = table.rows[ri].window_end;
        for (std::size_t ci = 0; ci < cols; ++ci)
            if (col_kept[ci]) row.values.push_back(table.rows[ri].values[ci]);
        out.rows.push_back(std::move(row));
    }
    return {std::move(out), std::move(report)};
}

// NaNs in glob-matched columns become `replacement`; it is an error when the
// pattern matches nothing.
inline FeatureTable replace_values(const FeatureTable& table, const std::string& column_pattern,
                                   double replacement) {
    std::vector<std::size_t> matched;
    for (std::size_t ci = 0; ci < table.columns.size(); ++ci)
        if (glob_match(column_pattern, table.columns[ci])) matched.push_back(ci);
    if (matched.empty())
        throw std::invalid_argument("replace_values: pattern '" + column_pattern +
                                    "' matches no column");
    FeatureTable out = table;
    for (auto& row : out.rows)
        for (std::size_t ci : matched)
            if (std::isnan(row.values[ci])) row.values[ci] = replacement;
    return out;
}

enum class Reducer { sum, mean, max };

inline const char* to_string(Reducer r) {
    switch (r) {
        case Reducer::sum: return "sum";
        case Reducer::mean: return "mean";
        case Reducer::max: return "max";
    }
    return "?";
}

// Row-wise NaN-propagating reduction of `sources` into a new `dest` column;
// the source columns are removed.
inline FeatureTable merge_columns(const FeatureTable& table, const std::vector<std::string>& sources,
                                  const std::string& dest, Reducer reducer) {
    if (sources.size() < 2) throw std::invalid_argument("merge_columns: need at least 2 sources");
    std::vector<std::size_t> src_idx;
    for (const auto& s : sources) {
        if (!table.has_column(s))
            throw std::invalid_argument("merge_columns: missing source column '" + s + "'");
        src_idx.push_back(table.column_index(s));
    }
    for (const auto& c : table.columns)
        if (c == dest && std::find(sources.begin(), sources.end(), dest) == sources.end())
            throw std::invalid_argument("merge_columns: dest column '" + dest + "' already exists");

    std::vector<bool> is_source(table.columns.size(), false);
    for (std::size_t i : src_idx) is_source[i] = true;

    FeatureTable out;
    for (std::size_t ci = 0; ci < table.columns.size(); ++ci)
        if (!is_source[ci]) out.columns.push_back(table.columns[ci]);
    out.columns.push_back(dest);

    for (const auto& row : table.rows) {
        TableRow nr;
        nr.file_id = row.file_id;
        nr.window_start = row.window_start;
        nr.window_end = row.window_end;
        for (std::size_t ci = 0; ci < table.columns.size(); ++ci)
            if (!is_source[ci]) nr.values.push_back(row.values[ci]);
        double acc = std::numeric_limits<double>::quiet_NaN();
        bool any_nan = false;
        bool first = true;
        for (std::size_t i : src_idx) {
            double v = row.values[i];
            if (std::isnan(v)) { any_nan = true; break; }
            if (first) { acc = v; first = false; continue; }
            switch (reducer) {
                case Reducer::sum: acc += v; break;
                case Reducer::mean: acc += v; break;
                case Reducer::max: acc = std::max(acc, v); break;
            }
        }
        if (any_nan) acc = std::numeric_limits<double>::quiet_NaN();
        else if (reducer == Reducer::mean) acc /= static_cast<double>(src_idx.size());
        nr.values.push_back(acc);
        out.rows.push_back(std::move(nr));
    }
    return out;
}

// Removes glob-matched feature columns. Key columns are never removable; a
// pattern that targets one is an error, a pattern matching nothing is a
// no-op (callers may warn).
inline FeatureTable drop_columns(const FeatureTable& table, const std::string& column_pattern) {
    for (const char* key : kKeyColumns)
        if (glob_match(column_pattern, key))
            throw std::invalid_argument(std::string("drop_columns: pattern matches key column ") + key);

    FeatureTable out;
    std::vector<bool> keep(table.columns.size(), true);
    for (std::size_t ci = 0; ci < table.columns.size(); ++ci)
        if (glob_match(column_pattern, table.columns[ci])) keep[ci] = false;

    for (std::size_t ci = 0; ci < table.columns.size(); ++ci)
        if (keep[ci]) out.columns.push_back(table.columns[ci]);
    for (const auto& row : table.rows) {
        TableRow nr;
        nr.file_id = row.file_id;
        nr.window_start = row.window_start;
        nr.window_end = row.window_end;
        for (std::size_t ci = 0; ci < table.columns.size(); ++ci)
            if (keep[ci]) nr.values.push_back(row.values[ci]);
        out.rows.push_back(std::move(nr));
    }
    return out;
}

} // namespace notefeat
