#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "notefeat/table.hpp"

using namespace notefeat;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& stem) {
    return fs::temp_directory_path() / (stem + "-" + std::to_string(std::random_device{}()) + ".csv");
}

FeatureTable random_table(std::mt19937& rng, bool allow_empty = true) {
    FeatureTable t;
    std::size_t cols = rng() % 8 + (allow_empty ? 0 : 1);
    for (std::size_t c = 0; c < cols; ++c) t.columns.push_back("col_" + std::to_string(c));
    std::size_t rows = rng() % 10;
    for (std::size_t r = 0; r < rows; ++r) {
        TableRow row;
        switch (rng() % 4) {
            case 0: row.file_id = "plain/file" + std::to_string(r) + ".mid"; break;
            case 1: row.file_id = "comma,name.mid"; break;
            case 2: row.file_id = "quoted\"q\".mid"; break;
            default: row.file_id = "newline\nname.mid"; break;
        }
        row.window_start = static_cast<long long>(rng() % 5);
        row.window_end = row.window_start + static_cast<long long>(rng() % 5);
        for (std::size_t c = 0; c < cols; ++c) {
            switch (rng() % 5) {
                case 0: row.values.push_back(std::numeric_limits<double>::quiet_NaN()); break;
                case 1: row.values.push_back(0.0); break;
                case 2: row.values.push_back(-1.5); break;
                case 3: row.values.push_back(63.666666666666664); break;
                default:
                    row.values.push_back(std::ldexp(static_cast<double>(rng()), -17));
            }
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace

TEST_CASE("write_csv formats floats with 17 significant digits and empty NaN") {
    FeatureTable t;
    t.columns = {"Pitch_Mean", "Zed"};
    TableRow r;
    r.file_id = "a.mid";
    r.values = {191.0 / 3.0, std::numeric_limits<double>::quiet_NaN()};
    t.rows.push_back(r);

    fs::path p = temp_file("fmt");
    write_csv(t, p);
    std::ifstream in(p);
    std::string header, line;
    std::getline(in, header);
    std::getline(in, line);
    fs::remove(p);
    CHECK(header == "file_id,window_start,window_end,Pitch_Mean,Zed");
    CHECK(line == "a.mid,0,0,63.666666666666664,");
}

TEST_CASE("header-only files round-trip as empty tables") {
    FeatureTable t;
    t.columns = {"A", "B"};
    fs::path p = temp_file("empty");
    write_csv(t, p);
    FeatureTable back = read_csv(p);
    fs::remove(p);
    CHECK(back.rows.empty());
    CHECK(back.columns == std::vector<std::string>{"A", "B"});
}

TEST_CASE("wrong field count reports the line number") {
    fs::path p = temp_file("ragged");
    {
        std::ofstream out(p);
        out << "file_id,window_start,window_end,A\n";
        out << "x.mid,0,0,1.5\n";
        out << "y.mid,0,0\n";
    }
    try {
        read_csv(p);
        FAIL("expected CsvError");
    } catch (const CsvError& e) {
        CHECK(e.line == 3);
    }
    fs::remove(p);
}

TEST_CASE("write then read is the identity on randomized tables") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        FeatureTable t = random_table(rng);
        fs::path p = temp_file("rt");
        write_csv(t, p);
        FeatureTable back = read_csv(p);
        fs::remove(p);
        CHECK(tables_equal(t, back));
        CHECK(std::is_sorted(back.columns.begin(), back.columns.end()));
    }
}

TEST_CASE("all-NaN column and empty table edge cases round-trip") {
    FeatureTable t;
    t.columns = {"OnlyNaN", "Mixed"};
    for (int r = 0; r < 4; ++r) {
        TableRow row;
        row.file_id = "f" + std::to_string(r);
        row.values = {std::numeric_limits<double>::quiet_NaN(),
                      r % 2 ? 1.0 : std::numeric_limits<double>::quiet_NaN()};
        t.rows.push_back(row);
    }
    fs::path p = temp_file("nan");
    write_csv(t, p);
    FeatureTable back = read_csv(p);
    fs::remove(p);
    CHECK(tables_equal(t, back));

    FeatureTable empty;
    fs::path p2 = temp_file("none");
    write_csv(empty, p2);
    FeatureTable back2 = read_csv(p2);
    fs::remove(p2);
    CHECK(back2.rows.empty());
    CHECK(back2.columns.empty());
}

TEST_CASE("quoted fields with commas, quotes and newlines survive") {
    FeatureTable t;
    t.columns = {"V"};
    TableRow r;
    r.file_id = "dir/has,comma\"and quote\"\nand newline.mid";
    r.values = {1.0};
    t.rows.push_back(r);
    fs::path p = temp_file("quote");
    write_csv(t, p);
    FeatureTable back = read_csv(p);
    fs::remove(p);
    REQUIRE(back.rows.size() == 1);
    CHECK(back.rows[0].file_id == r.file_id);
}

TEST_CASE("unknown extra columns are preserved") {
    fs::path p = temp_file("extra");
    {
        std::ofstream out(p);
        out << "file_id,window_start,window_end,Pitch_Mean,custom.metric\n";
        out << "a.mid,0,0,60,1.25\n";
    }
    FeatureTable t = read_csv(p);
    fs::remove(p);
    REQUIRE(t.columns.size() == 2);
    CHECK(t.columns[1] == "custom.metric");
    CHECK(t.rows[0].values[1] == 1.25);
}
