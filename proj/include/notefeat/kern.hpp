#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "notefeat/parse_error.hpp"
#include "notefeat/score.hpp"
#include "notefeat/stats.hpp"
#include "notefeat/text.hpp"
#include "notefeat/version.hpp"

namespace notefeat {

namespace kern_detail {

struct Token {
    bool rest = false;
    bool grace = false;
    bool tie_open = false;
    bool tie_close = false;
    bool tie_middle = false;
    bool has_duration = false;
    Rational duration;
    bool has_pitch = false;
    char step = 'C';
    int alter = 0;
    int octave = 4;
    int midi_pitch = 60;
};

// One note, rest, or chord subtoken in **kern notation. Editorial marks,
// beaming, slurs and articulations are skipped; a token that yields neither
// a pitch nor a rest nor a grace is unparsable.
inline std::optional<Token> parse_token(std::string_view tok) {
    Token out;
    std::size_t i = 0;
    bool any = false;

    while (i < tok.size()) {
        char c = tok[i];
        if (c == '[') { out.tie_open = true; ++i; continue; }
        if (c == ']') { out.tie_close = true; ++i; continue; }
        if (c == '_') { out.tie_middle = true; ++i; continue; }
        if (c >= '0' && c <= '9') {
            // recip duration: N -> 4/N quarters; 0 doubles per extra zero (breve, longa)
            std::size_t start = i;
            while (i < tok.size() && tok[i] >= '0' && tok[i] <= '9') ++i;
            std::string_view digits = tok.substr(start, i - start);
            int dots = 0;
            while (i < tok.size() && tok[i] == '.') { ++dots; ++i; }
            Rational base;
            if (digits.find_first_not_of('0') == std::string_view::npos) {
                base = Rational(8);
                for (std::size_t z = 1; z < digits.size(); ++z) base *= Rational(2);
            } else {
                std::int64_t n = 0;
                for (char d : digits) n = n * 10 + (d - '0');
                if (n <= 0 || n > 100000) return std::nullopt;
                base = Rational(4, n);
            }
            Rational dot_add = base;
            for (int d = 0; d < dots; ++d) {
                dot_add = dot_add / Rational(2);
                base += dot_add;
            }
            out.duration = base;
            out.has_duration = true;
            any = true;
            continue;
        }
        if ((c >= 'a' && c <= 'g') || (c >= 'A' && c <= 'G')) {
            std::size_t start = i;
            while (i < tok.size() && tok[i] == c) ++i;
            int reps = static_cast<int>(i - start);
            int sharps = 0, flats = 0;
            while (i < tok.size() && (tok[i] == '#' || tok[i] == '-' || tok[i] == 'n')) {
                if (tok[i] == '#') ++sharps;
                else if (tok[i] == '-') ++flats;
                ++i;
            }
            if (out.has_pitch) return std::nullopt; // two pitch runs: not a valid single token
            out.has_pitch = true;
            out.step = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            out.alter = sharps - flats;
            out.octave = std::islower(static_cast<unsigned char>(c)) ? 3 + reps : 4 - reps;
            SpelledPitch sp{out.step, out.alter, out.octave};
            out.midi_pitch = sp.semitone();
            any = true;
            continue;
        }
        if (c == 'r') { out.rest = true; any = true; ++i; continue; }
        if (c == 'q' || c == 'Q') { out.grace = true; any = true; ++i; continue; }
        // beaming, slurs, stems, articulations, editorial signifiers: ignore
        static const std::string_view ignorable = "LJKkMmW(){}xXyY/\\'\"`~^:;&oOtTsS$%@+|<>,imPp ";
        if (ignorable.find(c) != std::string_view::npos) { ++i; continue; }
        return std::nullopt;
    }

    if (!any) return std::nullopt;
    if (!out.rest && !out.has_pitch && !out.grace) return std::nullopt;
    if (!out.rest && !out.has_pitch) return std::nullopt; // bare grace marker
    if (out.has_pitch && (out.midi_pitch < 0 || out.midi_pitch > 127)) return std::nullopt;
    if (!out.grace && !out.has_duration) return std::nullopt;
    if (out.grace) { out.duration = Rational(0); out.has_duration = true; }
    return out;
}

} // namespace kern_detail

// Humdrum **kern parser. Tab-separated spines; only **kern spines yield
// parts. Spine split/merge (*^ / *v) is not supported.
inline ParseResult<Score> parse_kern(std::string_view raw_text, const std::string& path) {
    using namespace kern_detail;
    parser_invocations().fetch_add(1, std::memory_order_relaxed);

    std::string text = decode_text(raw_text);
    auto lines = split(text, '\n');

    struct Spine {
        bool is_kern = false;
        bool terminated = false;
        Rational clock;
        std::string name;
    };
    std::vector<Spine> spines;
    bool spines_defined = false;

    struct RawNote {
        int spine = 0;
        Rational onset;
        Rational duration;
        bool grace = false;
        SpelledPitch spelled;
        int midi_pitch = 60;
        bool tie_open = false;
        bool tie_middle = false;
        bool tie_close = false;
    };
    std::vector<RawNote> raw_notes;
    std::vector<Rational> bar_onsets;
    std::vector<std::tuple<Rational, int, int>> timesigs;           // onset, num, den
    std::vector<std::tuple<Rational, int>> keysigs;                 // onset, fifths
    std::vector<std::tuple<Rational, bool>> key_modes;              // onset, minor
    std::vector<std::pair<Rational, double>> tempos;
    Rational end_time;

    auto err = [&](std::string detail, std::size_t line_no, ParseErrorKind kind) {
        return ParseError{path, kind, std::move(detail), static_cast<std::int64_t>(line_no)};
    };

    for (std::size_t li = 0; li < lines.size(); ++li) {
        std::string_view line = lines[li];
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (line[0] == '!') continue; // global or local comment / layout line

        auto tokens = split(line, '\t');

        if (line[0] == '*') {
            if (!spines_defined && tokens[0].substr(0, 2) == "**") {
                for (auto t : tokens) {
                    Spine sp;
                    sp.is_kern = (t == "**kern");
                    spines.push_back(sp);
                }
                spines_defined = true;
                continue;
            }
            if (!spines_defined) return err("interpretation before exclusive interpretation", li + 1,
                                            ParseErrorKind::malformed_event);
            for (std::size_t s = 0; s < tokens.size() && s < spines.size(); ++s) {
                std::string_view t = tokens[s];
                Spine& sp = spines[s];
                if (t == "*^" || t == "*v")
                    return err("spine split/merge is not supported", li + 1,
                               ParseErrorKind::unsupported_construct);
                if (!sp.is_kern || sp.terminated) continue;
                if (t == "*-") { sp.terminated = true; continue; }
                if (t.substr(0, 3) == "*MM") {
                    double bpm = 0;
                    try { bpm = std::stod(std::string(t.substr(3))); } catch (...) { bpm = 0; }
                    if (bpm > 0) tempos.emplace_back(sp.clock, bpm);
                    continue;
                }
                if (t.substr(0, 2) == "*M" && t.size() > 2 && t[2] >= '0' && t[2] <= '9') {
                    auto slash = t.find('/');
                    if (slash != std::string_view::npos) {
                        int num = 0, den = 0;
                        for (std::size_t k = 2; k < slash; ++k)
                            if (t[k] >= '0' && t[k] <= '9') num = num * 10 + (t[k] - '0');
                        for (std::size_t k = slash + 1; k < t.size(); ++k)
                            if (t[k] >= '0' && t[k] <= '9') den = den * 10 + (t[k] - '0');
                        if (num > 0 && den > 0) timesigs.emplace_back(sp.clock, num, den);
                    }
                    continue;
                }
                if (t.substr(0, 3) == "*k[") {
                    int sharps = 0, flats = 0;
                    for (char c : t.substr(3)) {
                        if (c == '#') ++sharps;
                        else if (c == '-') ++flats;
                        else if (c == ']') break;
                    }
                    keysigs.emplace_back(sp.clock, sharps - flats);
                    continue;
                }
                if (t.size() >= 3 && t[0] == '*' && t.back() == ':' &&
                    ((t[1] >= 'A' && t[1] <= 'G') || (t[1] >= 'a' && t[1] <= 'g'))) {
                    key_modes.emplace_back(sp.clock, std::islower(static_cast<unsigned char>(t[1])) != 0);
                    continue;
                }
                if (t.substr(0, 3) == "*I\"") {
                    sp.name = std::string(t.substr(3));
                    continue;
                }
                // other interpretations are tolerated and skipped
            }
            continue;
        }

        if (!spines_defined)
            return err("data before exclusive interpretation", li + 1, ParseErrorKind::malformed_header);

        if (line[0] == '=') {
            Rational bar_at;
            bool have = false;
            for (std::size_t s = 0; s < spines.size(); ++s) {
                if (!spines[s].is_kern || spines[s].terminated) continue;
                if (!have || spines[s].clock > bar_at) { bar_at = spines[s].clock; have = true; }
            }
            if (have) bar_onsets.push_back(bar_at);
            continue;
        }

        // data row
        for (std::size_t s = 0; s < tokens.size() && s < spines.size(); ++s) {
            Spine& sp = spines[s];
            if (!sp.is_kern || sp.terminated) continue;
            std::string_view t = tokens[s];
            if (t.empty() || t == ".") continue;

            bool first_subtoken = true;
            Rational advance;
            for (auto sub : split(t, ' ')) {
                if (sub.empty()) continue;
                auto parsed = parse_token(sub);
                if (!parsed)
                    return err("unparsable token '" + std::string(sub) + "'", li + 1,
                               ParseErrorKind::malformed_event);
                if (first_subtoken) advance = parsed->grace ? Rational(0) : parsed->duration;
                if (parsed->has_pitch && !parsed->rest) {
                    RawNote n;
                    n.spine = static_cast<int>(s);
                    n.onset = sp.clock;
                    n.duration = parsed->grace ? Rational(0) : parsed->duration;
                    n.grace = parsed->grace;
                    n.spelled = {parsed->step, parsed->alter, parsed->octave};
                    n.midi_pitch = parsed->midi_pitch;
                    n.tie_open = parsed->tie_open;
                    n.tie_middle = parsed->tie_middle;
                    n.tie_close = parsed->tie_close;
                    raw_notes.push_back(n);
                }
                first_subtoken = false;
            }
            sp.clock += advance;
            if (sp.clock > end_time) end_time = sp.clock;
        }
    }

    if (!spines_defined)
        return err("no exclusive interpretation line", 1, ParseErrorKind::malformed_header);
    bool any_kern = false;
    for (const auto& sp : spines) any_kern = any_kern || sp.is_kern;
    if (!any_kern)
        return err("no **kern spine", 1, ParseErrorKind::malformed_header);

    // merge tie chains per (spine, pitch): '[' opens, '_' extends, ']' ends
    struct OpenTie { std::size_t note_idx; Rational expected_onset; };
    std::map<std::pair<int, int>, OpenTie> open_ties;
    std::vector<char> dropped(raw_notes.size(), 0);

    std::vector<std::size_t> order(raw_notes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return raw_notes[a].onset < raw_notes[b].onset;
    });

    std::vector<NoteEvent> events(raw_notes.size());
    for (std::size_t i : order) {
        const RawNote& n = raw_notes[i];
        auto key = std::make_pair(n.spine, n.midi_pitch);
        auto it = open_ties.find(key);
        if ((n.tie_middle || n.tie_close) && it != open_ties.end() &&
            it->second.expected_onset == n.onset) {
            events[it->second.note_idx].duration += n.duration;
            dropped[i] = 1;
            if (n.tie_close && !n.tie_middle && !n.tie_open) open_ties.erase(it);
            else it->second.expected_onset = n.onset + n.duration;
            continue;
        }
        NoteEvent ev;
        ev.onset = n.onset;
        ev.duration = n.duration;
        ev.midi_pitch = n.midi_pitch;
        ev.spelled_pitch = n.spelled;
        ev.grace = n.grace;
        events[i] = ev;
        if (n.tie_open)
            open_ties[key] = OpenTie{i, n.onset + n.duration};
    }

    std::map<int, std::vector<NoteEvent>> spine_notes;
    for (std::size_t s = 0; s < spines.size(); ++s)
        if (spines[s].is_kern) spine_notes[static_cast<int>(s)];
    for (std::size_t i = 0; i < raw_notes.size(); ++i) {
        if (dropped[i]) continue;
        NoteEvent ev = events[i];
        auto it = open_ties.find({raw_notes[i].spine, raw_notes[i].midi_pitch});
        if (it != open_ties.end() && it->second.note_idx == i) ev.tie_to_next = true;
        spine_notes[raw_notes[i].spine].push_back(ev);
    }

    ScoreBuilder builder(SourceFormat::kern);
    for (auto& [spine_index, notes_vec] : spine_notes) {
        Part& part = builder.add_part(spines[static_cast<std::size_t>(spine_index)].name);
        part.notes = std::move(notes_vec);
    }

    // measure structure from barlines: a bar starts a new measure only if
    // content extends beyond it
    std::vector<Rational> starts{Rational(0)};
    std::sort(bar_onsets.begin(), bar_onsets.end());
    for (const auto& onset : bar_onsets) {
        if (onset > starts.back() && onset < end_time) starts.push_back(onset);
    }
    std::sort(timesigs.begin(), timesigs.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });
    for (const auto& start : starts) {
        int num = 4, den = 4;
        for (const auto& [at, n2, d2] : timesigs)
            if (at <= start) { num = n2; den = d2; }
        builder.add_measure(start, num, den);
    }

    for (const auto& [at, fifths] : keysigs) {
        std::optional<bool> minor;
        for (const auto& [mat, mmin] : key_modes)
            if (mat == at) minor = mmin;
        builder.add_key_signature(at, fifths, minor);
    }
    for (const auto& [at, bpm] : tempos) builder.add_tempo(at, bpm, TempoSource::metronome_mark);

    return builder.finish(path, kParserVersion);
}

} // namespace notefeat
