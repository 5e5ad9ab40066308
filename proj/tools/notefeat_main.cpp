// notefeat command line: corpus feature extraction, cache maintenance,
// table post-processing, and the PCA + cross-validation benchmark harness.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "notefeat/notefeat.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool color_enabled() {
    return std::getenv("NO_COLOR") == nullptr && ::isatty(2);
}

void log_line(const std::string& line) {
    if (line.find(": error:") != std::string::npos && color_enabled())
        std::cerr << "\033[31m" << line << "\033[0m\n";
    else
        std::cerr << line << "\n";
}

json report_to_json(const notefeat::RunReport& report) {
    json errors = json::array();
    for (const auto& e : report.errors) {
        json entry = {{"path", e.path},
                      {"kind", notefeat::to_string(e.kind)},
                      {"detail", e.detail}};
        entry["byte_or_line"] = e.byte_or_line ? json(*e.byte_or_line) : json(nullptr);
        errors.push_back(entry);
    }
    return json{{"files_total", report.files_total},
                {"files_ok", report.files_ok},
                {"files_errored", report.files_errored},
                {"errors", errors},
                {"wall_seconds", report.wall_seconds},
                {"cache_hits", report.cache_hits}};
}

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << j.dump(2) << "\n";
}

double json_safe(double v) { return v; } // NaN handled by caller

int cmd_extract(const std::string& input, const std::string& output, const std::string& format,
                const std::string& features, std::optional<int> window_measures, int window_overlap,
                const std::string& cache_dir, int jobs, const std::string& annotations_dir,
                const std::string& report_path, bool quiet) {
    notefeat::FormatFilter filter = notefeat::FormatFilter::any;
    if (format == "midi") filter = notefeat::FormatFilter::midi;
    else if (format == "musicxml") filter = notefeat::FormatFilter::musicxml;
    else if (format == "kern") filter = notefeat::FormatFilter::kern;
    else if (format != "auto") {
        std::cerr << "error: unknown format filter '" << format << "'\n";
        return 1;
    }

    notefeat::RunOptions options;
    if (!features.empty()) {
        options.config.enabled_groups.clear();
        for (auto name : notefeat::split(features, ',')) {
            auto group = notefeat::feature_group_from_string(notefeat::trim(name));
            if (!group) {
                std::cerr << "error: unknown feature group '" << std::string(name) << "'\n";
                return 1;
            }
            options.config.enabled_groups.insert(*group);
        }
    }
    options.config.window_measures = window_measures;
    options.config.window_overlap = window_overlap;
    if (!cache_dir.empty()) options.cache_dir = fs::path(cache_dir);
    if (!annotations_dir.empty()) options.annotations_dir = fs::path(annotations_dir);
    options.jobs = jobs;
    options.corpus_root = fs::path(input);
    if (!quiet) options.log = log_line;

    auto paths = notefeat::discover(input, filter);
    auto [table, report] = notefeat::run_corpus(paths, options);
    notefeat::write_csv(table, output);

    std::cerr << "extracted " << report.files_ok << "/" << report.files_total << " files ("
              << report.files_errored << " errored, " << report.cache_hits << " cache hits) in "
              << report.wall_seconds << " s -> " << output << "\n";
    if (!report_path.empty()) write_json(report_to_json(report), report_path);
    return 0;
}

int cmd_postprocess(const std::string& table_path, const std::string& output, bool run_nan_filter,
                    const std::vector<std::string>& replaces, const std::vector<std::string>& drops,
                    const std::vector<std::string>& merges, const std::string& report_path) {
    notefeat::FeatureTable table = notefeat::read_csv(table_path);
    json report = json::object();

    if (run_nan_filter) {
        auto [filtered, nan_report] = notefeat::nan_filter(table);
        table = std::move(filtered);
        json rows_removed = json::array();
        for (auto idx : nan_report.rows_removed) rows_removed.push_back(idx);
        report["nan_filter"] = {
            {"r", nan_report.r},
            {"n", nan_report.n},
            {"q99", nan_report.row_filter_ran ? json(nan_report.q99) : json(nullptr)},
            {"threshold", nan_report.row_filter_ran ? json(nan_report.threshold) : json(nullptr)},
            {"rows_removed", rows_removed},
            {"columns_removed", nan_report.columns_removed},
        };
    }

    for (const auto& spec : replaces) {
        auto eq = spec.rfind('=');
        if (eq == std::string::npos) throw std::runtime_error("--replace expects PATTERN=VALUE");
        auto value = notefeat::parse_double(spec.substr(eq + 1));
        if (!value) throw std::runtime_error("--replace: bad value in '" + spec + "'");
        table = notefeat::replace_values(table, spec.substr(0, eq), *value);
    }

    for (const auto& spec : merges) {
        // SRC1,SRC2,...=DEST:REDUCER
        auto eq = spec.rfind('=');
        if (eq == std::string::npos) throw std::runtime_error("--merge expects SRCS=DEST:REDUCER");
        auto colon = spec.rfind(':');
        if (colon == std::string::npos || colon < eq)
            throw std::runtime_error("--merge expects SRCS=DEST:REDUCER");
        std::vector<std::string> sources;
        for (auto s : notefeat::split(spec.substr(0, eq), ','))
            sources.emplace_back(notefeat::trim(s));
        std::string dest = spec.substr(eq + 1, colon - eq - 1);
        std::string reducer_name = spec.substr(colon + 1);
        notefeat::Reducer reducer;
        if (reducer_name == "sum") reducer = notefeat::Reducer::sum;
        else if (reducer_name == "mean") reducer = notefeat::Reducer::mean;
        else if (reducer_name == "max") reducer = notefeat::Reducer::max;
        else throw std::runtime_error("--merge: unknown reducer '" + reducer_name + "'");
        table = notefeat::merge_columns(table, sources, dest, reducer);
    }

    for (const auto& pattern : drops) {
        bool any = false;
        for (const auto& col : table.columns) any = any || notefeat::glob_match(pattern, col);
        if (!any) std::cerr << "warning: --drop pattern '" << pattern << "' matches nothing\n";
        table = notefeat::drop_columns(table, pattern);
    }

    notefeat::write_csv(table, output);
    std::cerr << "wrote " << table.rows.size() << " rows x " << table.columns.size()
              << " feature columns -> " << output << "\n";
    if (!report_path.empty()) write_json(report, report_path);
    return 0;
}

std::map<std::string, std::string> read_labels(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open labels: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    notefeat::csv_detail::RecordReader reader{text};
    auto header = reader.next_record();
    long long id_col = -1, class_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "file_id") id_col = static_cast<long long>(i);
        if (header[i] == "class") class_col = static_cast<long long>(i);
    }
    if (id_col < 0 || class_col < 0)
        throw std::runtime_error("labels file needs columns: file_id, class");
    std::map<std::string, std::string> labels;
    while (!reader.done()) {
        auto fields = reader.next_record();
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != header.size()) throw std::runtime_error("labels: ragged row");
        labels[fields[static_cast<std::size_t>(id_col)]] = fields[static_cast<std::size_t>(class_col)];
    }
    return labels;
}

json eval_result_to_json(const notefeat::EvalResult& result) {
    json per_model = json::object();
    for (const auto& [name, acc] : result.per_model) per_model[name] = json_safe(acc);
    return json{{"per_model", per_model},
                {"best", result.best},
                {"folds", result.folds},
                {"seed", result.seed}};
}

int cmd_evaluate(const std::vector<std::string>& table_paths, const std::string& labels_path,
                 int folds, unsigned seed, std::optional<int> pca, bool paper_mode, bool combine,
                 const std::string& report_path) {
    std::vector<notefeat::FeatureTable> tables;
    for (const auto& p : table_paths) tables.push_back(notefeat::read_csv(p));
    auto labels = read_labels(labels_path);

    notefeat::CrossValidateOptions options;
    if (pca) options.pca_k = static_cast<std::size_t>(*pca);
    options.paper_mode = paper_mode;

    json report = json::object();
    json table_reports = json::array();

    std::vector<notefeat::FeatureTable> eval_tables = tables;
    std::vector<std::string> names(table_paths.begin(), table_paths.end());
    if (combine) {
        std::vector<std::string> tags;
        for (std::size_t i = 0; i < tables.size(); ++i) tags.push_back("t" + std::to_string(i + 1));
        eval_tables.push_back(notefeat::combine_tables(tables, tags));
        names.push_back("combined");
    }

    auto matrices = notefeat::intersect_and_prune(eval_tables, labels, folds);
    for (std::size_t i = 0; i < matrices.size(); ++i) {
        notefeat::EvalResult result = notefeat::cross_validate(matrices[i], folds, seed, options);
        json entry = eval_result_to_json(result);
        entry["table"] = names[i];
        entry["samples"] = matrices[i].ids.size();
        table_reports.push_back(entry);
        std::cout << names[i] << ": best=" << result.best;
        for (const auto& [model, acc] : result.per_model) std::cout << " " << model << "=" << acc;
        std::cout << "\n";
    }
    report["tables"] = table_reports;
    report["folds"] = folds;
    report["seed"] = seed;
    if (pca) report["pca"] = *pca;
    report["paper_mode"] = paper_mode;
    if (!report_path.empty()) write_json(report, report_path);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"notefeat: symbolic music feature extraction and benchmarking"};
    app.require_subcommand(1);

    // extract
    auto* extract = app.add_subcommand("extract", "extract features from a score corpus into CSV");
    std::string input, output, format = "auto", features, cache_dir, annotations_dir, report_path;
    int window_overlap = 0, jobs = 1;
    std::optional<int> window_measures;
    bool quiet = false;
    extract->add_option("--input", input, "corpus root directory")->required();
    extract->add_option("--output", output, "output CSV path")->required();
    extract->add_option("--format", format, "auto|midi|musicxml|kern (default auto)");
    extract->add_option("--features", features,
                        "comma-separated feature groups (default: all); groups: pitch, interval, "
                        "vertical, rhythm, dynamics_tempo, texture, instrumentation, key, lyrics, harmony");
    extract->add_option("--window-measures", window_measures, "window length in measures");
    extract->add_option("--window-overlap", window_overlap, "window overlap in measures (default 0)");
    extract->add_option("--cache-dir", cache_dir, "parsed-score cache directory");
    extract->add_option("--jobs", jobs, "parallel workers (default 1)");
    extract->add_option("--annotations", annotations_dir, "directory of harmony sidecar .tsv files");
    extract->add_option("--report", report_path, "write the run report as JSON");
    extract->add_flag("--quiet", quiet, "suppress the line-per-file log");

    // cache clear
    auto* cache = app.add_subcommand("cache", "cache maintenance");
    cache->require_subcommand(1);
    auto* cache_clear_cmd = cache->add_subcommand("clear", "remove all cache entries");
    std::string clear_dir;
    cache_clear_cmd->add_option("--cache-dir", clear_dir, "cache directory")->required();

    // postprocess
    auto* post = app.add_subcommand("postprocess", "NaN filtering and column surgery on a table");
    std::string post_table, post_output, post_report;
    bool post_nan_filter = false;
    std::vector<std::string> post_replace, post_drop, post_merge;
    post->add_option("--table", post_table, "input CSV")->required();
    post->add_option("--output", post_output, "output CSV")->required();
    post->add_flag("--nan-filter", post_nan_filter, "apply the NaN row/column heuristic");
    post->add_option("--replace", post_replace, "PATTERN=VALUE: replace NaNs in matching columns");
    post->add_option("--drop", post_drop, "glob of columns to remove");
    post->add_option("--merge", post_merge, "SRC1,SRC2,..=DEST:REDUCER (sum|mean|max)");
    post->add_option("--report", post_report, "write the NaN-filter report as JSON");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "stratified k-fold CV with balanced accuracy");
    std::vector<std::string> eval_tables;
    std::string eval_labels, eval_report;
    int eval_folds = 10;
    unsigned eval_seed = 0;
    std::optional<int> eval_pca;
    bool eval_paper_mode = false, eval_combine = false;
    eval->add_option("--table", eval_tables, "feature table CSV (repeatable)")->required();
    eval->add_option("--labels", eval_labels, "labels CSV with columns file_id, class")->required();
    eval->add_option("--folds", eval_folds, "cross-validation folds (default 10)");
    eval->add_option("--seed", eval_seed, "shuffle seed (default 0)");
    eval->add_option("--pca", eval_pca, "project onto the first K principal components");
    eval->add_flag("--paper-mode", eval_paper_mode,
                   "fit standardization and PCA once on the whole table before CV");
    eval->add_flag("--combine", eval_combine, "also evaluate the joined feature tables");
    eval->add_option("--report", eval_report, "write results as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*extract)
            return cmd_extract(input, output, format, features, window_measures, window_overlap,
                               cache_dir, jobs, annotations_dir, report_path, quiet);
        if (*cache_clear_cmd) {
            std::size_t removed = notefeat::cache_clear(clear_dir);
            std::cerr << "removed " << removed << " cache entries\n";
            return 0;
        }
        if (*post)
            return cmd_postprocess(post_table, post_output, post_nan_filter, post_replace,
                                   post_drop, post_merge, post_report);
        if (*eval)
            return cmd_evaluate(eval_tables, eval_labels, eval_folds, eval_seed, eval_pca,
                                eval_paper_mode, eval_combine, eval_report);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
