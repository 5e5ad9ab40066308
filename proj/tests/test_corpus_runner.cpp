#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "notefeat/corpus.hpp"
#include "support/test_corpus.hpp"

using namespace notefeat;
namespace fs = std::filesystem;

namespace {

struct TempTree {
    fs::path root;
    TempTree() {
        root = fs::temp_directory_path() /
               ("notefeat-corpus-" + std::to_string(std::random_device{}()));
        fs::create_directories(root);
    }
    ~TempTree() {
        std::error_code ec;
        fs::remove_all(root, ec);
    }
    void write(const std::string& rel, const std::string& bytes) const {
        fs::path p = root / rel;
        fs::create_directories(p.parent_path());
        std::ofstream out(p, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

testscores::TestScore small_score(unsigned seed) {
    std::mt19937 rng(seed);
    return testscores::random_benchmark_score(rng, 2, 4);
}

} // namespace

TEST_CASE("discover walks recursively, filters, sorts") {
    TempTree tree;
    tree.write("b/two.krn", "**kern\n4c\n*-\n");
    tree.write("a/one.mid", "x");
    tree.write("zz.musicxml", "x");
    tree.write("ignored.txt", "x");
    tree.write("deep/deeper/three.mxl", "x");

    auto all = discover(tree.root);
    REQUIRE(all.size() == 4);
    CHECK(all[0].filename() == "one.mid");
    CHECK(all[1].filename() == "two.krn");
    CHECK(all[2].filename() == "three.mxl");
    CHECK(all[3].filename() == "zz.musicxml");

    auto midi_only = discover(tree.root, FormatFilter::midi);
    REQUIRE(midi_only.size() == 1);
    CHECK(midi_only[0].filename() == "one.mid");

    TempTree empty;
    CHECK(discover(empty.root).empty());
    CHECK_THROWS(discover(tree.root / "missing"));
}

TEST_CASE("error isolation: corrupt files lose rows, not the run") {
    TempTree tree;
    for (int i = 0; i < 3; ++i)
        tree.write("ok" + std::to_string(i) + ".mid", testscores::encode_midi(small_score(i)));
    tree.write("bad.mid", "MThx not midi at all");

    RunOptions options;
    options.corpus_root = tree.root;
    auto [table, report] = run_corpus(discover(tree.root), options);
    CHECK(report.files_total == 4);
    CHECK(report.files_ok == 3);
    CHECK(report.files_errored == 1);
    REQUIRE(report.errors.size() == 1);
    CHECK(report.errors[0].kind == ParseErrorKind::malformed_header);
    CHECK(table.rows.size() == 3);
    std::set<std::string> ids;
    for (const auto& r : table.rows) ids.insert(r.file_id);
    CHECK(ids == std::set<std::string>{"ok0.mid", "ok1.mid", "ok2.mid"});
}

TEST_CASE("output is identical across jobs settings") {
    TempTree tree;
    for (int i = 0; i < 12; ++i)
        tree.write("s" + std::to_string(i) + ".mid", testscores::encode_midi(small_score(100 + i)));

    RunOptions serial;
    serial.corpus_root = tree.root;
    serial.jobs = 1;
    auto [t1, r1] = run_corpus(discover(tree.root), serial);

    RunOptions parallel = serial;
    parallel.jobs = 4;
    auto [t4, r4] = run_corpus(discover(tree.root), parallel);

    fs::path p1 = tree.root / "out1.csv";
    fs::path p4 = tree.root / "out4.csv";
    write_csv(t1, p1);
    write_csv(t4, p4);
    CHECK(read_file(p1) == read_file(p4)); // byte-identical
    CHECK(r1.files_ok == r4.files_ok);
}

TEST_CASE("cache transparency and zero-parse warm runs") {
    TempTree tree;
    for (int i = 0; i < 6; ++i)
        tree.write("c" + std::to_string(i) + ".mid", testscores::encode_midi(small_score(200 + i)));
    fs::path cache_dir = tree.root / "cache";

    RunOptions options;
    options.corpus_root = tree.root;
    options.cache_dir = cache_dir;

    auto paths = discover(tree.root);
    auto [cold, cold_report] = run_corpus(paths, options);
    CHECK(cold_report.cache_hits == 0);

    auto before = parser_invocations().load();
    auto [warm, warm_report] = run_corpus(paths, options);
    auto after = parser_invocations().load();
    CHECK(after == before); // zero parser invocations on the warm run
    CHECK(warm_report.cache_hits == warm_report.files_ok);

    fs::path pc = tree.root / "cold.csv";
    fs::path pw = tree.root / "warm.csv";
    write_csv(cold, pc);
    write_csv(warm, pw);
    CHECK(read_file(pc) == read_file(pw));
}

TEST_CASE("annotation sidecars feed harmony features") {
    TempTree tree;
    testscores::TestScore spec = small_score(300);
    tree.write("with_ann.mid", testscores::encode_midi(spec));
    tree.write("with_ann.tsv", "measure\tbeat\tlabel\tlocalkey\n1\t0\tI\tC\n2\t0\tV\tC\n");
    tree.write("without.mid", testscores::encode_midi(small_score(301)));

    RunOptions options;
    options.corpus_root = tree.root;
    auto [table, report] = run_corpus(discover(tree.root), options);
    REQUIRE(report.files_ok == 2);
    std::size_t harm_col = table.column_index("Harm_Count");
    for (const auto& row : table.rows) {
        if (row.file_id == "with_ann.mid") CHECK(row.values[harm_col] == 2);
        else CHECK(std::isnan(row.values[harm_col]));
    }
}

TEST_CASE("musicxml harmony elements are picked up without a sidecar, cold and warm") {
    TempTree tree;
    std::string doc =
        "<?xml version=\"1.0\"?><score-partwise><part-list>"
        "<score-part id=\"P1\"><part-name>X</part-name></score-part></part-list>"
        "<part id=\"P1\"><measure number=\"1\">"
        "<attributes><divisions>1</divisions></attributes>"
        "<harmony><root><root-step>C</root-step></root><kind>major</kind></harmony>"
        "<note><pitch><step>C</step><octave>4</octave></pitch><duration>4</duration></note>"
        "</measure></part></score-partwise>";
    tree.write("h.musicxml", doc);

    RunOptions options;
    options.corpus_root = tree.root;
    options.cache_dir = tree.root / "cache";
    auto paths = discover(tree.root);
    auto [cold, r1] = run_corpus(paths, options);
    auto [warm, r2] = run_corpus(paths, options);
    REQUIRE(r2.cache_hits == 1);
    std::size_t harm_col = cold.column_index("Harm_Count");
    CHECK(cold.rows[0].values[harm_col] == 1);
    CHECK(warm.rows[0].values[harm_col] == 1); // embedded annotations survive the cache
}

TEST_CASE("windowed corpus runs produce one row per window") {
    TempTree tree;
    tree.write("w.mid", testscores::encode_midi(small_score(400))); // 4 measures
    RunOptions options;
    options.corpus_root = tree.root;
    options.config.window_measures = 2;
    options.config.window_overlap = 0;
    auto [table, report] = run_corpus(discover(tree.root), options);
    REQUIRE(report.files_ok == 1);
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].window_start == 1);
    CHECK(table.rows[0].window_end == 2);
    CHECK(table.rows[1].window_start == 3);
    CHECK(table.rows[1].window_end == 4);
}

TEST_CASE("format invariance across the conformance corpus encodings") {
    // velocity-, spelling-, and lyrics-independent features must agree
    static const char* excluded_prefixes[] = {"Velocity_", "MidiTempo_", "Instr_",
                                              "Lyrics_",   "Dyn_",       "Tempo_"};
    auto comparable = [&](const std::string& name) {
        for (const char* prefix : excluded_prefixes)
            if (name.rfind(prefix, 0) == 0) return false;
        return true;
    };

    ExtractionConfig cfg;
    for (const auto& spec : testscores::conformance_corpus()) {
        INFO("score: " << spec.title);
        auto midi = parse_midi(testscores::encode_midi(spec), spec.title + ".mid");
        auto xml = parse_musicxml(testscores::encode_musicxml(spec), spec.title + ".xml");
        auto kern = parse_kern(testscores::encode_kern(spec), spec.title + ".krn");
        REQUIRE(midi.ok());
        REQUIRE(xml.ok());
        REQUIRE(kern.ok());
        CHECK(validate(midi.value()).empty());
        CHECK(validate(xml.value()).empty());
        CHECK(validate(kern.value()).empty());

        // identical note triples, time signature maps, measure counts
        auto triples = [](const Score& s) {
            std::multiset<std::tuple<Rational, Rational, int>> out;
            for (const auto& p : s.parts)
                for (const auto& n : p.notes) out.insert({n.onset, n.duration, n.midi_pitch});
            return out;
        };
        auto ts_map = [](const Score& s) {
            std::vector<std::tuple<int, Rational, int, int>> out;
            for (const auto& m : s.measure_map) out.emplace_back(m.index, m.start, m.ts_num, m.ts_den);
            return out;
        };
        CHECK(triples(midi.value()) == triples(xml.value()));
        CHECK(triples(midi.value()) == triples(kern.value()));
        CHECK(ts_map(midi.value()) == ts_map(xml.value()));
        CHECK(ts_map(midi.value()) == ts_map(kern.value()));

        auto rm = extract(midi.value(), nullptr, cfg).values;
        auto rx = extract(xml.value(), nullptr, cfg).values;
        auto rk = extract(kern.value(), nullptr, cfg).values;
        for (const auto& [name, vm] : rm) {
            if (!comparable(name)) continue;
            INFO("feature: " << name);
            double vx = rx.at(name);
            double vk = rk.at(name);
            if (std::isnan(vm)) {
                CHECK(std::isnan(vx));
                CHECK(std::isnan(vk));
            } else {
                CHECK(vx == Catch::Approx(vm).margin(1e-9));
                CHECK(vk == Catch::Approx(vm).margin(1e-9));
            }
        }
    }
}
