#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "notefeat/annotations.hpp"
#include "notefeat/cache.hpp"
#include "notefeat/extraction.hpp"
#include "notefeat/kern.hpp"
#include "notefeat/midi.hpp"
#include "notefeat/musicxml.hpp"
#include "notefeat/table.hpp"
#include "notefeat/version.hpp"

namespace notefeat {

struct RunReport {
    long long files_total = 0;
    long long files_ok = 0;
    long long files_errored = 0;
    std::vector<ParseError> errors;
    double wall_seconds = 0;
    long long cache_hits = 0;
};

enum class FormatFilter { any, midi, musicxml, kern };

inline std::optional<SourceFormat> format_for_path(const std::filesystem::path& path) {
    std::string ext = to_lower(path.extension().string());
    if (ext == ".mid" || ext == ".midi") return SourceFormat::midi;
    if (ext == ".xml" || ext == ".musicxml" || ext == ".mxl") return SourceFormat::musicxml;
    if (ext == ".krn") return SourceFormat::kern;
    return std::nullopt;
}

// Recursive walk under root, extension-matched, sorted lexicographically by
// relative path. This ordering anchors all downstream determinism.
inline std::vector<std::filesystem::path> discover(const std::filesystem::path& root,
                                                   FormatFilter filter = FormatFilter::any) {
    namespace fs = std::filesystem;
    if (!fs::exists(root))
        throw std::runtime_error("discover: no such directory: " + root.string());

    std::vector<std::pair<std::string, fs::path>> found;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        auto format = format_for_path(entry.path());
        if (!format) continue;
        if (filter != FormatFilter::any) {
            if (filter == FormatFilter::midi && *format != SourceFormat::midi) continue;
            if (filter == FormatFilter::musicxml && *format != SourceFormat::musicxml) continue;
            if (filter == FormatFilter::kern && *format != SourceFormat::kern) continue;
        }
        found.emplace_back(fs::relative(entry.path(), root).generic_string(), entry.path());
    }
    std::sort(found.begin(), found.end());
    std::vector<fs::path> out;
    out.reserve(found.size());
    for (auto& [rel, path] : found) out.push_back(std::move(path));
    return out;
}

struct RunOptions {
    ExtractionConfig config;
    std::optional<std::filesystem::path> cache_dir;
    int jobs = 1;
    std::optional<std::filesystem::path> corpus_root;       // file ids become relative to this
    std::optional<std::filesystem::path> annotations_dir;   // <dir>/<relative stem>.tsv
    std::function<void(const std::string&)> log;            // optional line-per-file logging
};

namespace corpus_detail {

inline std::optional<std::string> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// sidecar resolution: explicit config map, then annotations dir, then a
// .tsv file next to the score
inline std::optional<std::filesystem::path> annotation_path_for(
    const std::filesystem::path& score_path, const std::string& file_id, const RunOptions& options) {
    namespace fs = std::filesystem;
    auto it = options.config.annotation_lookup.find(score_path.generic_string());
    if (it == options.config.annotation_lookup.end())
        it = options.config.annotation_lookup.find(file_id);
    if (it != options.config.annotation_lookup.end()) return fs::path(it->second);
    if (options.annotations_dir) {
        fs::path candidate = *options.annotations_dir / fs::path(file_id).replace_extension(".tsv");
        if (fs::exists(candidate)) return candidate;
    }
    fs::path beside = score_path;
    beside.replace_extension(".tsv");
    if (fs::exists(beside)) return beside;
    return std::nullopt;
}

struct FileOutcome {
    std::vector<FeatureRow> rows;
    std::optional<ParseError> error;
    bool cache_hit = false;
};

inline FileOutcome process_file(const std::filesystem::path& path, const std::string& file_id,
                                const RunOptions& options) {
    FileOutcome outcome;
    auto format = format_for_path(path);
    if (!format) {
        outcome.error = ParseError{path.string(), ParseErrorKind::unsupported_construct,
                                   "unrecognized extension", std::nullopt};
        return outcome;
    }

    auto bytes = read_file(path);
    if (!bytes) {
        outcome.error = ParseError{path.string(), ParseErrorKind::io, "cannot read file", std::nullopt};
        return outcome;
    }

    ParsedScore parsed;
    bool have_score = false;
    std::optional<CacheKey> key;
    if (options.cache_dir) {
        key = cache_key(*bytes, kParserVersion, *format);
        if (auto hit = cache_get(*options.cache_dir, *key)) {
            parsed = std::move(*hit);
            have_score = true;
            outcome.cache_hit = true;
        }
    }

    if (!have_score) {
        switch (*format) {
            case SourceFormat::midi: {
                auto res = parse_midi(*bytes, path.string());
                if (!res) { outcome.error = res.error(); return outcome; }
                parsed.score = std::move(res.value());
                break;
            }
            case SourceFormat::musicxml: {
                auto res = parse_musicxml_full(*bytes, path.string());
                if (!res) { outcome.error = res.error(); return outcome; }
                parsed = std::move(res.value());
                break;
            }
            case SourceFormat::kern: {
                auto res = parse_kern(*bytes, path.string());
                if (!res) { outcome.error = res.error(); return outcome; }
                parsed.score = std::move(res.value());
                break;
            }
        }
        if (options.cache_dir && key)
            cache_put(*options.cache_dir, *key, parsed.score, parsed.annotations); // best effort
    }

    // sidecar annotations override any embedded ones
    std::vector<HarmonicAnnotation> annotations = std::move(parsed.annotations);
    if (auto ann_path = annotation_path_for(path, file_id, options)) {
        if (auto ann_bytes = read_file(*ann_path)) {
            auto res = parse_annotations(*ann_bytes, ann_path->string());
            if (res) annotations = std::move(res.value());
            else if (options.log) options.log("warning: " + res.error().message());
        }
    }

    try {
        if (options.config.window_measures) {
            outcome.rows = extract_windowed(parsed.score, &annotations, options.config);
        } else {
            outcome.rows.push_back(extract(parsed.score, &annotations, options.config));
        }
    } catch (const std::exception& e) {
        outcome.rows.clear();
        outcome.error = ParseError{path.string(), ParseErrorKind::malformed_event,
                                   std::string("extraction failed: ") + e.what(), std::nullopt};
        return outcome;
    }
    for (auto& row : outcome.rows) row.file_id = file_id;
    return outcome;
}

} // namespace corpus_detail

// Parses (cache first), extracts, and aggregates every file into one table.
// Output row order equals input path order regardless of jobs; a failing
// file contributes an error entry instead of rows.
inline std::pair<FeatureTable, RunReport> run_corpus(const std::vector<std::filesystem::path>& paths,
                                                     const RunOptions& options) {
    namespace fs = std::filesystem;
    if (options.jobs < 1) throw std::invalid_argument("run_corpus: jobs must be >= 1");

    auto started = std::chrono::steady_clock::now();

    std::vector<std::string> file_ids(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        if (options.corpus_root) {
            std::error_code ec;
            fs::path rel = fs::relative(paths[i], *options.corpus_root, ec);
            file_ids[i] = (ec || rel.empty()) ? paths[i].generic_string() : rel.generic_string();
        } else {
            file_ids[i] = paths[i].generic_string();
        }
    }

    std::vector<corpus_detail::FileOutcome> outcomes(paths.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= paths.size()) return;
            outcomes[i] = corpus_detail::process_file(paths[i], file_ids[i], options);
            if (options.log) {
                std::scoped_lock lock(log_mutex);
                const auto& o = outcomes[i];
                options.log(file_ids[i] + (o.error ? ": error: " + o.error->message()
                                                   : (o.cache_hit ? ": ok (cached)" : ": ok")));
            }
        }
    };

    int jobs = std::min<int>(options.jobs, static_cast<int>(std::max<std::size_t>(paths.size(), 1)));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    FeatureTable table;
    table.columns = list_features(options.config);
    RunReport report;
    report.files_total = static_cast<long long>(paths.size());

    for (std::size_t i = 0; i < paths.size(); ++i) {
        auto& outcome = outcomes[i];
        if (outcome.error) {
            ++report.files_errored;
            report.errors.push_back(std::move(*outcome.error));
            continue;
        }
        ++report.files_ok;
        if (outcome.cache_hit) ++report.cache_hits;
        for (auto& row : outcome.rows) {
            TableRow tr;
            tr.file_id = row.file_id;
            tr.window_start = row.window_start;
            tr.window_end = row.window_end;
            tr.values.reserve(table.columns.size());
            for (const auto& name : table.columns) {
                auto it = row.values.find(name);
                tr.values.push_back(it != row.values.end()
                                        ? it->second
                                        : std::numeric_limits<double>::quiet_NaN());
            }
            table.rows.push_back(std::move(tr));
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return {std::move(table), std::move(report)};
}

} // namespace notefeat
