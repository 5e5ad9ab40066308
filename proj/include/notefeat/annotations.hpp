#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "notefeat/parse_error.hpp"
#include "notefeat/score.hpp"
#include "notefeat/text.hpp"

namespace notefeat {

// Harmony sidecar reader. Tab-separated with a header line of exactly
// measure, beat, label, localkey; one annotation per line.
inline ParseResult<std::vector<HarmonicAnnotation>> parse_annotations(std::string_view raw_text,
                                                                      const std::string& path) {
    auto err = [&](std::string detail, std::size_t line_no) {
        return ParseError{path, ParseErrorKind::malformed_event, std::move(detail),
                          static_cast<std::int64_t>(line_no)};
    };

    std::string text = decode_text(raw_text);
    auto lines = split(text, '\n');
    std::vector<HarmonicAnnotation> out;

    bool header_seen = false;
    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto cols = split(line, '\t');
        if (!header_seen) {
            if (cols.size() < 4 || trim(cols[0]) != "measure" || trim(cols[1]) != "beat" ||
                trim(cols[2]) != "label" || trim(cols[3]) != "localkey")
                return err("header must be: measure\tbeat\tlabel\tlocalkey", li + 1);
            header_seen = true;
            continue;
        }
        if (cols.size() < 4) return err("expected 4 tab-separated columns", li + 1);

        HarmonicAnnotation ann;
        auto measure = parse_int(cols[0]);
        auto beat = parse_double(cols[1]);
        if (!measure || *measure < 1) return err("non-numeric or invalid measure", li + 1);
        if (!beat || *beat < 0) return err("non-numeric or invalid beat", li + 1);
        ann.measure_index = static_cast<int>(*measure);
        ann.beat = *beat;
        ann.label = std::string(trim(cols[2]));
        ann.local_key = std::string(trim(cols[3]));
        if (ann.label.empty()) return err("empty label", li + 1);
        out.push_back(std::move(ann));
    }
    if (!header_seen) return err("missing header line", 1);

    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.measure_index, a.beat) < std::tie(b.measure_index, b.beat);
    });
    return out;
}

} // namespace notefeat
