#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "notefeat/rational.hpp"

namespace notefeat {

enum class SourceFormat : std::uint8_t { midi = 0, musicxml = 1, kern = 2 };

inline const char* to_string(SourceFormat f) {
    switch (f) {
        case SourceFormat::midi: return "midi";
        case SourceFormat::musicxml: return "musicxml";
        case SourceFormat::kern: return "kern";
    }
    return "?";
}

enum class TempoSource : std::uint8_t { midi_meta = 0, metronome_mark = 1, tempo_word = 2 };

// Written dynamic marks, ppp..fff. Level values 1..8 for feature emission.
enum class DynamicMark : std::uint8_t { ppp = 1, pp, p, mp, mf, f, ff, fff };

inline std::optional<DynamicMark> dynamic_mark_from_string(const std::string& s) {
    static const std::map<std::string, DynamicMark> table = {
        {"ppp", DynamicMark::ppp}, {"pp", DynamicMark::pp}, {"p", DynamicMark::p},
        {"mp", DynamicMark::mp},   {"mf", DynamicMark::mf}, {"f", DynamicMark::f},
        {"ff", DynamicMark::ff},   {"fff", DynamicMark::fff}};
    auto it = table.find(s);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

struct SpelledPitch {
    char step = 'C';       // A..G
    int alter = 0;         // -2..+2
    int octave = 4;        // scientific, C4 = middle C

    int semitone() const {
        static const int base[7] = {9, 11, 0, 2, 4, 5, 7}; // A B C D E F G
        return base[step - 'A'] + alter + 12 * (octave + 1);
    }
    bool operator==(const SpelledPitch&) const = default;
};

struct NoteEvent {
    Rational onset;                       // quarters from score start, >= 0
    Rational duration;                    // quarters, > 0 unless grace
    int midi_pitch = 60;                  // 0..127
    std::optional<SpelledPitch> spelled_pitch;
    std::optional<int> velocity;          // 1..127, MIDI sources only
    bool grace = false;
    bool tie_to_next = false;             // set when a tie could not be merged
    int measure_index = 1;                // 1-based, consistent with measure map

    bool operator==(const NoteEvent&) const = default;
};

struct Lyric {
    Rational onset;
    std::string syllable;   // trailing '-' marks continuation into the next syllable
    bool operator==(const Lyric&) const = default;
};

struct Part {
    int index = 0;
    std::string name;
    std::optional<int> midi_program;      // 0..127
    bool percussion = false;              // MIDI channel 10
    std::vector<NoteEvent> notes;         // sorted by (onset, midi_pitch)
    std::vector<Lyric> lyrics;            // onsets coincide with note onsets

    bool operator==(const Part&) const = default;
};

struct Measure {
    int index = 1;                        // 1-based
    Rational start;                       // quarters
    int ts_num = 4;
    int ts_den = 4;

    Rational nominal_length() const { return Rational(4 * ts_num, ts_den); }
    bool operator==(const Measure&) const = default;
};

struct KeySignatureEvent {
    Rational onset;
    int fifths = 0;                       // -7..+7
    std::optional<bool> minor;            // mode when known
    bool operator==(const KeySignatureEvent&) const = default;
};

struct TempoEvent {
    Rational onset;
    double bpm = 120.0;
    TempoSource source = TempoSource::midi_meta;
    bool operator==(const TempoEvent&) const = default;
};

struct DynamicEvent {
    Rational onset;
    int part_index = 0;
    DynamicMark mark = DynamicMark::mf;
    bool operator==(const DynamicEvent&) const = default;
};

// Unified in-memory representation every parser produces and every feature
// consumes. Treated as immutable once built; safe to share across threads.
struct Score {
    std::vector<Part> parts;
    std::vector<Measure> measure_map;     // starts at measure 1, onset 0
    std::vector<KeySignatureEvent> key_signatures;
    std::vector<TempoEvent> tempo_events;
    std::vector<DynamicEvent> dynamic_events;
    SourceFormat source_format = SourceFormat::midi;
    std::string source_path;
    std::string parser_version;

    bool operator==(const Score&) const = default;
};

struct HarmonicAnnotation {
    int measure_index = 1;
    double beat = 0.0;                    // quarter offset within the measure
    std::string label;                    // "I", "V7", "viio", ...
    std::string local_key;                // "C" major, "g" minor; may be empty
    bool operator==(const HarmonicAnnotation&) const = default;
};

inline Rational total_span(const Score& score) {
    Rational span(0);
    for (const auto& part : score.parts)
        for (const auto& n : part.notes) {
            Rational end = n.onset + n.duration;
            if (end > span) span = end;
        }
    return span;
}

// Notes sounding at time t: onset <= t < onset + duration. Grace notes have
// zero duration and never count.
inline int sounding_count(const Score& score, const Rational& t) {
    int count = 0;
    for (const auto& part : score.parts)
        for (const auto& n : part.notes) {
            if (n.grace) continue;
            if (n.onset <= t && t < n.onset + n.duration) ++count;
        }
    return count;
}

inline int measure_index_at(const std::vector<Measure>& map, const Rational& onset) {
    int idx = map.empty() ? 1 : map.front().index;
    for (const auto& m : map) {
        if (m.start <= onset) idx = m.index;
        else break;
    }
    return idx;
}

// End of the span covered by the measure map: last start + nominal length.
inline Rational measure_map_end(const std::vector<Measure>& map) {
    if (map.empty()) return Rational(0);
    return map.back().start + map.back().nominal_length();
}

// Model validator. Returns every violated invariant; empty means the Score
// is well formed.
inline std::vector<std::string> validate(const Score& score) {
    std::vector<std::string> problems;
    auto fail = [&](std::string msg) { problems.push_back(std::move(msg)); };

    if (score.measure_map.empty()) {
        fail("measure_map is empty");
    } else {
        if (score.measure_map.front().index != 1 || !score.measure_map.front().start.is_zero())
            fail("measure_map must start at measure 1, onset 0");
        for (std::size_t i = 1; i < score.measure_map.size(); ++i) {
            if (score.measure_map[i].index != score.measure_map[i - 1].index + 1)
                fail("measure indices must be consecutive");
            if (!(score.measure_map[i - 1].start < score.measure_map[i].start))
                fail("measure start onsets must be strictly increasing");
        }
    }
    Rational map_end = measure_map_end(score.measure_map);

    for (const auto& part : score.parts) {
        for (std::size_t i = 0; i < part.notes.size(); ++i) {
            const NoteEvent& n = part.notes[i];
            if (n.onset.is_negative()) fail("note onset < 0");
            if (n.grace) {
                if (!n.duration.is_zero()) fail("grace note must have duration 0");
            } else if (!(Rational(0) < n.duration)) {
                fail("non-grace note must have duration > 0");
            }
            if (n.midi_pitch < 0 || n.midi_pitch > 127) fail("midi_pitch out of 0..127");
            if (n.velocity && (*n.velocity < 1 || *n.velocity > 127)) fail("velocity out of 1..127");
            if (n.spelled_pitch && ((n.spelled_pitch->semitone() % 12 + 12) % 12 != (n.midi_pitch % 12 + 12) % 12))
                fail("spelled pitch disagrees with midi_pitch modulo 12");
            if (!score.measure_map.empty()) {
                if (!(n.onset < map_end)) fail("note onset outside measure map span");
                if (n.measure_index != measure_index_at(score.measure_map, n.onset))
                    fail("measure_index inconsistent with onset");
            }
            if (i > 0) {
                const NoteEvent& prev = part.notes[i - 1];
                if (std::tie(n.onset, n.midi_pitch) < std::tie(prev.onset, prev.midi_pitch))
                    fail("notes not sorted by (onset, midi_pitch)");
            }
        }
        for (const auto& lyric : part.lyrics) {
            bool found = std::any_of(part.notes.begin(), part.notes.end(),
                                     [&](const NoteEvent& n) { return n.onset == lyric.onset; });
            if (!found) fail("lyric onset does not coincide with any note onset in its part");
        }
    }
    return problems;
}

// Assembles a well-formed Score from parser output: sorts notes, merges
// overlapping identical pitches (longest wins), derives missing measures
// and note measure indices.
class ScoreBuilder {
public:
    explicit ScoreBuilder(SourceFormat format) { score_.source_format = format; }

    Part& add_part(std::string name = {}) {
        Part p;
        p.index = static_cast<int>(score_.parts.size());
        p.name = std::move(name);
        score_.parts.push_back(std::move(p));
        return score_.parts.back();
    }

    // Explicit measure structure (MusicXML, kern). start onsets must be
    // strictly increasing; the first call must be at onset 0.
    void add_measure(const Rational& start, int ts_num, int ts_den) {
        Measure m;
        m.index = static_cast<int>(score_.measure_map.size()) + 1;
        m.start = start;
        m.ts_num = ts_num;
        m.ts_den = ts_den;
        score_.measure_map.push_back(m);
    }

    void add_key_signature(const Rational& onset, int fifths, std::optional<bool> minor = {}) {
        fifths = std::clamp(fifths, -7, 7);
        score_.key_signatures.push_back({onset, fifths, minor});
    }
    void add_tempo(const Rational& onset, double bpm, TempoSource source) {
        if (bpm > 0) score_.tempo_events.push_back({onset, bpm, source});
    }
    void add_dynamic(const Rational& onset, int part_index, DynamicMark mark) {
        score_.dynamic_events.push_back({onset, part_index, mark});
    }

    Score finish(std::string source_path, std::string parser_version) {
        score_.source_path = std::move(source_path);
        score_.parser_version = std::move(parser_version);

        for (auto& part : score_.parts) {
            std::stable_sort(part.notes.begin(), part.notes.end(),
                             [](const NoteEvent& a, const NoteEvent& b) {
                                 return std::tie(a.onset, a.midi_pitch) < std::tie(b.onset, b.midi_pitch);
                             });
            merge_overlaps(part);
            drop_orphan_lyrics(part);
        }

        ensure_measure_coverage();
        for (auto& part : score_.parts)
            for (auto& n : part.notes)
                n.measure_index = measure_index_at(score_.measure_map, n.onset);

        auto by_onset = [](const auto& a, const auto& b) { return a.onset < b.onset; };
        std::stable_sort(score_.key_signatures.begin(), score_.key_signatures.end(), by_onset);
        std::stable_sort(score_.tempo_events.begin(), score_.tempo_events.end(), by_onset);
        std::stable_sort(score_.dynamic_events.begin(), score_.dynamic_events.end(), by_onset);
        return std::move(score_);
    }

private:
    // Overlapping notes of identical pitch within one part: the longest one
    // wins (ties: earliest onset). Deterministic repair for double-struck or
    // malformed input.
    static void merge_overlaps(Part& part) {
        std::vector<NoteEvent> kept;
        kept.reserve(part.notes.size());
        // last kept interval per pitch, as an index into kept
        std::map<int, std::size_t> open;
        for (const NoteEvent& n : part.notes) {
            if (n.grace) { kept.push_back(n); continue; }
            auto it = open.find(n.midi_pitch);
            if (it != open.end()) {
                NoteEvent& prev = kept[it->second];
                if (n.onset < prev.onset + prev.duration) {
                    if (n.duration > prev.duration) prev = n;
                    continue;
                }
            }
            kept.push_back(n);
            open[n.midi_pitch] = kept.size() - 1;
        }
        part.notes = std::move(kept);
        std::stable_sort(part.notes.begin(), part.notes.end(),
                         [](const NoteEvent& a, const NoteEvent& b) {
                             return std::tie(a.onset, a.midi_pitch) < std::tie(b.onset, b.midi_pitch);
                         });
    }

    void drop_orphan_lyrics(Part& part) {
        std::vector<Lyric> kept;
        for (auto& lyric : part.lyrics) {
            bool found = std::any_of(part.notes.begin(), part.notes.end(),
                                     [&](const NoteEvent& n) { return n.onset == lyric.onset; });
            if (found) kept.push_back(std::move(lyric));
        }
        std::stable_sort(kept.begin(), kept.end(),
                         [](const Lyric& a, const Lyric& b) { return a.onset < b.onset; });
        part.lyrics = std::move(kept);
    }

    // Guarantees a measure map that starts at (1, 0) and covers every onset,
    // extending with the last time signature when the source ran short.
    void ensure_measure_coverage() {
        if (score_.measure_map.empty())
            score_.measure_map.push_back({1, Rational(0), 4, 4});
        Rational last_onset(0);
        for (const auto& part : score_.parts)
            for (const auto& n : part.notes)
                if (n.onset > last_onset) last_onset = n.onset;
        while (!(last_onset < measure_map_end(score_.measure_map))) {
            const Measure& last = score_.measure_map.back();
            Measure next = last;
            next.index = last.index + 1;
            next.start = last.start + last.nominal_length();
            score_.measure_map.push_back(next);
        }
    }

    Score score_;
};

} // namespace notefeat
