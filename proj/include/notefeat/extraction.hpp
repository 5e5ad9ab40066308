#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "notefeat/features.hpp"
#include "notefeat/score.hpp"

namespace notefeat {

enum class FeatureGroup {
    pitch, interval, vertical, rhythm, dynamics_tempo,
    texture, instrumentation, key, lyrics, harmony,
};

inline const std::vector<FeatureGroup>& all_feature_groups() {
    static const std::vector<FeatureGroup> groups = {
        FeatureGroup::pitch,   FeatureGroup::interval,        FeatureGroup::vertical,
        FeatureGroup::rhythm,  FeatureGroup::dynamics_tempo,  FeatureGroup::texture,
        FeatureGroup::instrumentation, FeatureGroup::key,     FeatureGroup::lyrics,
        FeatureGroup::harmony};
    return groups;
}

inline const char* to_string(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::pitch: return "pitch";
        case FeatureGroup::interval: return "interval";
        case FeatureGroup::vertical: return "vertical";
        case FeatureGroup::rhythm: return "rhythm";
        case FeatureGroup::dynamics_tempo: return "dynamics_tempo";
        case FeatureGroup::texture: return "texture";
        case FeatureGroup::instrumentation: return "instrumentation";
        case FeatureGroup::key: return "key";
        case FeatureGroup::lyrics: return "lyrics";
        case FeatureGroup::harmony: return "harmony";
    }
    return "?";
}

inline std::optional<FeatureGroup> feature_group_from_string(std::string_view name) {
    for (FeatureGroup g : all_feature_groups())
        if (name == to_string(g)) return g;
    return std::nullopt;
}

struct ExtractionConfig {
    std::set<FeatureGroup> enabled_groups{all_feature_groups().begin(), all_feature_groups().end()};
    std::optional<int> window_measures;
    int window_overlap = 0;
    bool emit_partial_trailing = true;
    std::map<std::string, std::string> annotation_lookup; // score path -> sidecar path
};

struct FeatureRow {
    std::string file_id;
    int window_start = 0; // 0 = whole score
    int window_end = 0;
    FeatureMap values;
};

inline const std::vector<std::string>& feature_group_names(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::pitch: return pitch_feature_names();
        case FeatureGroup::interval: return interval_feature_names();
        case FeatureGroup::vertical: return vertical_feature_names();
        case FeatureGroup::rhythm: return rhythm_feature_names();
        case FeatureGroup::dynamics_tempo: return dynamics_tempo_feature_names();
        case FeatureGroup::texture: return texture_feature_names();
        case FeatureGroup::instrumentation: return instrumentation_feature_names();
        case FeatureGroup::key: return key_feature_names();
        case FeatureGroup::lyrics: return lyrics_feature_names();
        case FeatureGroup::harmony: return harmony_feature_names();
    }
    static const std::vector<std::string> empty;
    return empty;
}

// Every name the enabled groups can emit, lexicographic, stable across runs.
inline std::vector<std::string> list_features(const ExtractionConfig& config) {
    std::set<std::string> names;
    for (FeatureGroup g : config.enabled_groups) {
        const auto& group_names = feature_group_names(g);
        names.insert(group_names.begin(), group_names.end());
    }
    return {names.begin(), names.end()};
}

inline FeatureRow extract(const Score& score,
                          const std::vector<HarmonicAnnotation>* annotations,
                          const ExtractionConfig& config) {
    static const std::vector<HarmonicAnnotation> no_annotations;
    FeatureRow row;
    row.file_id = score.source_path;
    for (FeatureGroup g : config.enabled_groups) {
        FeatureMap part;
        switch (g) {
            case FeatureGroup::pitch: part = pitch_features(score); break;
            case FeatureGroup::interval: part = melodic_interval_features(score); break;
            case FeatureGroup::vertical: part = vertical_interval_features(score); break;
            case FeatureGroup::rhythm: part = rhythm_features(score); break;
            case FeatureGroup::dynamics_tempo: part = dynamics_tempo_features(score); break;
            case FeatureGroup::texture: part = texture_density_features(score); break;
            case FeatureGroup::instrumentation: part = instrumentation_features(score); break;
            case FeatureGroup::key: part = key_features(score); break;
            case FeatureGroup::lyrics: part = lyrics_features(score); break;
            case FeatureGroup::harmony:
                part = harmony_features(score, annotations ? *annotations : no_annotations);
                break;
        }
        row.values.merge(part); // group name sets are disjoint
    }
    return row;
}

// Restriction of a score to measures [first..last], renormalized so the
// window starts at measure 1, onset 0. Events are assigned by onset; every
// part survives even when empty inside the window.
inline Score window_subscore(const Score& score, int first, int last) {
    Score sub;
    sub.source_format = score.source_format;
    sub.source_path = score.source_path;
    sub.parser_version = score.parser_version;

    if (score.measure_map.empty()) return sub;
    int max_measure = score.measure_map.back().index;
    first = std::max(first, 1);
    last = std::min(last, max_measure);
    if (last < first) return sub;

    Rational shift = score.measure_map[static_cast<std::size_t>(first - 1)].start;
    Rational window_end = last < max_measure
                              ? score.measure_map[static_cast<std::size_t>(last)].start
                              : measure_map_end(score.measure_map);

    for (const auto& m : score.measure_map) {
        if (m.index < first || m.index > last) continue;
        Measure shifted = m;
        shifted.index = m.index - (first - 1);
        shifted.start = m.start - shift;
        sub.measure_map.push_back(shifted);
    }

    for (const auto& part : score.parts) {
        Part p;
        p.index = part.index;
        p.name = part.name;
        p.midi_program = part.midi_program;
        p.percussion = part.percussion;
        for (const auto& n : part.notes) {
            if (n.measure_index < first || n.measure_index > last) continue;
            NoteEvent moved = n;
            moved.onset = n.onset - shift;
            moved.measure_index = n.measure_index - (first - 1);
            p.notes.push_back(moved);
        }
        for (const auto& lyric : part.lyrics) {
            if (lyric.onset < shift || !(lyric.onset < window_end)) continue;
            bool has_note = false;
            for (const auto& n : p.notes)
                if (n.onset == lyric.onset - shift) { has_note = true; break; }
            if (has_note) p.lyrics.push_back({lyric.onset - shift, lyric.syllable});
        }
        sub.parts.push_back(std::move(p));
    }

    auto in_window = [&](const Rational& onset) { return !(onset < shift) && onset < window_end; };
    for (const auto& k : score.key_signatures)
        if (in_window(k.onset)) sub.key_signatures.push_back({k.onset - shift, k.fifths, k.minor});
    for (const auto& t : score.tempo_events)
        if (in_window(t.onset)) sub.tempo_events.push_back({t.onset - shift, t.bpm, t.source});
    for (const auto& d : score.dynamic_events)
        if (in_window(d.onset)) sub.dynamic_events.push_back({d.onset - shift, d.part_index, d.mark});

    return sub;
}

inline std::vector<HarmonicAnnotation> window_annotations(
    const std::vector<HarmonicAnnotation>& annotations, int first, int last) {
    std::vector<HarmonicAnnotation> out;
    for (const auto& a : annotations) {
        if (a.measure_index < first || a.measure_index > last) continue;
        HarmonicAnnotation moved = a;
        moved.measure_index = a.measure_index - (first - 1);
        out.push_back(moved);
    }
    return out;
}

// Measure-based windows [1..w], [1+s..w+s], ... with stride s = w - overlap.
// A trailing partial window covering leftover measures is emitted only when
// it spans at least ceil(w/2) measures (and partial emission is enabled).
inline std::vector<FeatureRow> extract_windowed(const Score& score,
                                                const std::vector<HarmonicAnnotation>* annotations,
                                                const ExtractionConfig& config) {
    if (!config.window_measures || *config.window_measures < 1)
        throw std::invalid_argument("extract_windowed: window_measures must be set and >= 1");
    int w = *config.window_measures;
    int overlap = config.window_overlap;
    if (overlap >= w || overlap < 0)
        throw std::invalid_argument("extract_windowed: window_overlap must be in [0, window_measures)");
    int stride = w - overlap;
    int measures = score.measure_map.empty() ? 0 : score.measure_map.back().index;

    std::vector<std::pair<int, int>> windows;
    int a = 1;
    for (; a + w - 1 <= measures; a += stride) windows.emplace_back(a, a + w - 1);
    int covered = windows.empty() ? 0 : windows.back().second;
    if (covered < measures && config.emit_partial_trailing) {
        int span = measures - a + 1;
        if (span >= (w + 1) / 2) windows.emplace_back(a, measures);
    }

    std::vector<FeatureRow> rows;
    for (const auto& [first, last] : windows) {
        Score sub = window_subscore(score, first, last);
        std::vector<HarmonicAnnotation> sub_ann;
        if (annotations) sub_ann = window_annotations(*annotations, first, last);
        FeatureRow row = extract(sub, annotations ? &sub_ann : nullptr, config);
        row.file_id = score.source_path;
        row.window_start = first;
        row.window_end = last;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace notefeat
