#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "notefeat/postprocess.hpp"

using namespace notefeat;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

FeatureTable make_table(std::size_t rows, std::vector<std::string> columns) {
    FeatureTable t;
    t.columns = std::move(columns);
    for (std::size_t r = 0; r < rows; ++r) {
        TableRow row;
        row.file_id = "f" + std::to_string(r);
        row.values.assign(t.columns.size(), 0.0);
        t.rows.push_back(row);
    }
    return t;
}

// straight-from-the-text reimplementation used as the oracle
struct OracleResult {
    std::vector<std::size_t> rows_removed;
    std::set<std::string> columns_removed;
};

OracleResult nan_filter_oracle(const FeatureTable& t) {
    OracleResult out;
    const std::size_t R = t.rows.size();
    const std::size_t C = t.columns.size();
    std::size_t clean = 0;
    for (std::size_t c = 0; c < C; ++c) {
        bool has_nan = false;
        for (std::size_t r = 0; r < R; ++r) has_nan = has_nan || std::isnan(t.rows[r].values[c]);
        if (!has_nan) ++clean;
    }
    double r_ratio = static_cast<double>(clean) / static_cast<double>(R);
    std::vector<bool> kept(R, true);
    if (r_ratio < 0.1) {
        std::vector<long long> n(R, 0);
        for (std::size_t r = 0; r < R; ++r)
            for (std::size_t c = 0; c < C; ++c)
                if (std::isnan(t.rows[r].values[c])) ++n[r];
        std::vector<long long> sorted = n;
        std::sort(sorted.begin(), sorted.end());
        std::size_t rank = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(R)));
        if (rank < 1) rank = 1;
        if (rank > R) rank = R;
        double q99 = static_cast<double>(sorted[rank - 1]);
        double threshold = q99 / 0.99;
        for (std::size_t r = 0; r < R; ++r)
            if (static_cast<double>(n[r]) > threshold) {
                kept[r] = false;
                out.rows_removed.push_back(r);
            }
    }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t r = 0; r < R; ++r)
            if (kept[r] && std::isnan(t.rows[r].values[c])) {
                out.columns_removed.insert(t.columns[c]);
                break;
            }
    return out;
}

} // namespace

TEST_CASE("nan_filter: all-NaN column dropped when r >= 0.1") {
    FeatureTable t = make_table(4, {"a", "b", "c"});
    for (auto& row : t.rows) row.values[2] = kNan;
    auto [out, report] = nan_filter(t);
    CHECK(report.r == Catch::Approx(0.5)); // 2 clean columns / 4 rows
    CHECK_FALSE(report.row_filter_ran);
    CHECK(report.rows_removed.empty());
    CHECK(report.columns_removed == std::vector<std::string>{"c"});
    CHECK(out.columns == std::vector<std::string>{"a", "b"});
    CHECK(out.rows.size() == 4);
}

TEST_CASE("nan_filter: constructed 1000x50 example removes exactly the heavy rows") {
    FeatureTable t = make_table(1000, {});
    for (int c = 0; c < 50; ++c) t.columns.push_back("col" + std::to_string(c));
    for (auto& row : t.rows) row.values.assign(50, 0.0);
    // 3 NaN-free columns: 0,1,2. Rows 0..989 carry one NaN in column X=3;
    // rows 990..999 carry 40 NaNs each, staggered so every column 3..49 is hit.
    for (std::size_t r = 0; r < 990; ++r) t.rows[r].values[3] = kNan;
    for (std::size_t k = 0; k < 10; ++k)
        for (std::size_t j = 0; j < 40; ++j)
            t.rows[990 + k].values[3 + (k * 7 + j) % 47] = kNan;

    auto [out, report] = nan_filter(t);
    CHECK(report.r == Catch::Approx(3.0 / 1000.0));
    CHECK(report.row_filter_ran);
    CHECK(report.q99 == 1.0);
    CHECK(report.threshold == Catch::Approx(1.0 / 0.99));
    REQUIRE(report.rows_removed.size() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(report.rows_removed[i] == 990 + i);
    // column 3 is NaN in the surviving rows and must go; 4..42 are clean again
    CHECK(out.rows.size() == 990);
    CHECK(out.columns.size() == 49);
    for (const auto& row : out.rows)
        for (double v : row.values) CHECK_FALSE(std::isnan(v));
}

TEST_CASE("nan_filter: NaN-free table passes through unchanged") {
    FeatureTable t = make_table(20, {"a", "b"});
    auto [out, report] = nan_filter(t);
    CHECK(report.r == Catch::Approx(0.1));
    CHECK(out.columns == t.columns);
    CHECK(out.rows.size() == t.rows.size());
    CHECK(report.rows_removed.empty());
    CHECK(report.columns_removed.empty());
}

TEST_CASE("nan_filter rejects empty tables") {
    FeatureTable t = make_table(0, {"a"});
    CHECK_THROWS_AS(nan_filter(t), std::invalid_argument);
}

TEST_CASE("nan_filter output is NaN-free, idempotent, and bounded") {
    std::mt19937 rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t rows = 5 + rng() % 196;
        std::size_t cols = 3 + rng() % 58;
        FeatureTable t = make_table(rows, {});
        for (std::size_t c = 0; c < cols; ++c) t.columns.push_back("c" + std::to_string(c));
        double density = static_cast<double>(rng() % 50) / 100.0;
        for (auto& row : t.rows) {
            row.values.assign(cols, 1.0);
            for (auto& v : row.values)
                if (static_cast<double>(rng() % 1000) / 1000.0 < density) v = kNan;
        }

        auto oracle = nan_filter_oracle(t);
        auto [out, report] = nan_filter(t);

        // agreement with the independent oracle
        CHECK(report.rows_removed == oracle.rows_removed);
        CHECK(std::set<std::string>(report.columns_removed.begin(),
                                    report.columns_removed.end()) == oracle.columns_removed);

        // output free of NaN
        for (const auto& row : out.rows)
            for (double v : row.values) CHECK_FALSE(std::isnan(v));

        // cardinality bound when the row filter ran
        if (report.row_filter_ran)
            CHECK(report.rows_removed.size() <= rows / 100);

        // idempotence
        if (!out.rows.empty()) {
            auto [out2, report2] = nan_filter(out);
            CHECK(out2.columns == out.columns);
            CHECK(out2.rows.size() == out.rows.size());
            CHECK(report2.rows_removed.empty());
            CHECK(report2.columns_removed.empty());
        }
    }
}

TEST_CASE("replace_values") {
    FeatureTable t = make_table(3, {"Harm_Count", "Harm_TonicRatio", "Pitch_Mean"});
    t.rows[0].values[0] = kNan;
    t.rows[1].values[1] = kNan;
    t.rows[2].values[2] = kNan;
    FeatureTable out = replace_values(t, "Harm_*", 0.0);
    CHECK(out.rows[0].values[0] == 0.0);
    CHECK(out.rows[1].values[1] == 0.0);
    CHECK(std::isnan(out.rows[2].values[2]));

    FeatureTable all = replace_values(t, "*", -1.0);
    for (const auto& row : all.rows)
        for (double v : row.values) CHECK_FALSE(std::isnan(v));

    CHECK_THROWS_AS(replace_values(t, "Nope_*", 0.0), std::invalid_argument);
}

TEST_CASE("merge_columns") {
    FeatureTable t = make_table(2, {"x", "y", "z"});
    t.rows[0].values = {2.0, 4.0, 9.0};
    t.rows[1].values = {1.0, kNan, 3.0};

    FeatureTable sum = merge_columns(t, {"x", "y"}, "xy", Reducer::sum);
    CHECK(sum.columns == std::vector<std::string>{"z", "xy"});
    CHECK(sum.rows[0].values[1] == 6.0);
    CHECK(std::isnan(sum.rows[1].values[1])); // NaN propagates

    FeatureTable mean = merge_columns(t, {"x", "y"}, "m", Reducer::mean);
    CHECK(mean.rows[0].values[1] == 3.0);

    FeatureTable mx = merge_columns(t, {"x", "z"}, "mx", Reducer::max);
    CHECK(mx.rows[0].values[1] == 9.0);

    CHECK_THROWS_AS(merge_columns(t, {"x"}, "solo", Reducer::sum), std::invalid_argument);
    CHECK_THROWS_AS(merge_columns(t, {"x", "nope"}, "d", Reducer::sum), std::invalid_argument);
    CHECK_THROWS_AS(merge_columns(t, {"x", "y"}, "z", Reducer::sum), std::invalid_argument);
}

TEST_CASE("drop_columns") {
    FeatureTable t = make_table(2, {"Velocity_Mean", "Velocity_Std", "Pitch_Mean"});
    FeatureTable out = drop_columns(t, "Velocity_*");
    CHECK(out.columns == std::vector<std::string>{"Pitch_Mean"});

    FeatureTable unchanged = drop_columns(t, "Nothing_*");
    CHECK(unchanged.columns == t.columns);

    CHECK_THROWS_AS(drop_columns(t, "file_id"), std::invalid_argument);
    CHECK_THROWS_AS(drop_columns(t, "window_*"), std::invalid_argument);
}
