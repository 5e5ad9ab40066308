#pragma once

// Test corpus machinery: an abstract score description plus encoders to SMF,
// MusicXML, and **kern. Each part is a gap-free stream of events (notes,
// chords, rests), so all three encodings are derivable without ambiguity.

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "notefeat/rational.hpp"
#include "notefeat/score.hpp"

namespace testscores {

using notefeat::Rational;
using notefeat::SpelledPitch;

struct TestEvent {
    Rational duration;                    // quarters; must be recip-expressible
    std::vector<SpelledPitch> pitches;    // empty = rest
    bool tie_to_next = false;             // single-pitch events only
    std::optional<std::string> lyric;     // trailing '-' marks continuation
};

struct TestPart {
    std::string name;
    std::optional<int> midi_program;
    std::vector<TestEvent> events;
};

struct TestScore {
    std::string title = "test";
    std::map<int, std::pair<int, int>> time_sigs = {{1, {4, 4}}}; // measure -> num/den
    std::optional<std::pair<int, bool>> key;                      // fifths, minor
    double bpm = 0;                                               // 0 = no tempo mark
    std::vector<TestPart> parts;
};

// ---------------------------------------------------------------------------
// shared geometry

inline std::vector<Rational> measure_starts(const TestScore& s, int measure_count) {
    std::vector<Rational> starts;
    Rational at(0);
    int num = 4, den = 4;
    for (int m = 1; m <= measure_count; ++m) {
        auto it = s.time_sigs.find(m);
        if (it != s.time_sigs.end()) { num = it->second.first; den = it->second.second; }
        starts.push_back(at);
        at += Rational(4 * num, den);
    }
    return starts;
}

inline Rational part_length(const TestPart& p) {
    Rational total(0);
    for (const auto& e : p.events) total += e.duration;
    return total;
}

inline int measure_count_of(const TestScore& s) {
    Rational longest(0);
    for (const auto& p : s.parts) longest = std::max(longest, part_length(p));
    Rational at(0);
    int num = 4, den = 4;
    int m = 0;
    while (at < longest) {
        ++m;
        auto it = s.time_sigs.find(m);
        if (it != s.time_sigs.end()) { num = it->second.first; den = it->second.second; }
        at += Rational(4 * num, den);
    }
    return std::max(m, 1);
}

// Every part must fill whole measures, no event may straddle a barline, and
// ties must connect single-pitch events of the same pitch.
inline void check_measure_aligned(const TestScore& s) {
    int measures = measure_count_of(s);
    auto starts = measure_starts(s, measures + 1);
    std::set<Rational> boundaries(starts.begin(), starts.end());
    Rational total = starts.back();
    for (const auto& p : s.parts) {
        if (part_length(p) != total)
            throw std::logic_error("test score: part '" + p.name + "' does not fill the score");
        Rational at(0);
        for (std::size_t i = 0; i < p.events.size(); ++i) {
            const TestEvent& e = p.events[i];
            Rational end = at + e.duration;
            for (const auto& b : boundaries)
                if (at < b && b < end)
                    throw std::logic_error("test score: event straddles a barline");
            if (e.tie_to_next) {
                if (e.pitches.size() != 1 || i + 1 >= p.events.size() ||
                    p.events[i + 1].pitches.size() != 1 ||
                    p.events[i + 1].pitches[0].semitone() != e.pitches[0].semitone())
                    throw std::logic_error("test score: malformed tie");
            }
            at = end;
        }
    }
}

// ---------------------------------------------------------------------------
// Standard MIDI File encoding (format 1)

namespace midi_enc {

inline void vlq(std::string& out, std::uint32_t v) {
    char bytes[4];
    int n = 0;
    do {
        bytes[n++] = static_cast<char>(v & 0x7F);
        v >>= 7;
    } while (v > 0);
    for (int i = n - 1; i >= 0; --i)
        out.push_back(i == 0 ? bytes[i] : static_cast<char>(bytes[i] | 0x80));
}

inline void u32be(std::string& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void u16be(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v >> 8));
    out.push_back(static_cast<char>(v & 0xFF));
}

struct TrackEvent {
    std::int64_t tick;
    int order; // stable tiebreak
    std::string bytes;
};

inline std::string finish_track(std::vector<TrackEvent> events, std::int64_t end_tick) {
    std::stable_sort(events.begin(), events.end(), [](const TrackEvent& a, const TrackEvent& b) {
        if (a.tick != b.tick) return a.tick < b.tick;
        return a.order < b.order;
    });
    std::string data;
    std::int64_t at = 0;
    for (const auto& e : events) {
        vlq(data, static_cast<std::uint32_t>(e.tick - at));
        data += e.bytes;
        at = e.tick;
    }
    vlq(data, static_cast<std::uint32_t>(end_tick - at));
    data += std::string("\xFF\x2F\x00", 3);
    std::string out = "MTrk";
    u32be(out, static_cast<std::uint32_t>(data.size()));
    return out + data;
}

} // namespace midi_enc

inline std::string encode_midi(const TestScore& s, int velocity = 64) {
    using namespace midi_enc;
    check_measure_aligned(s);

    std::int64_t division = 1;
    for (const auto& p : s.parts)
        for (const auto& e : p.events) division = std::lcm(division, e.duration.den());
    division = std::lcm<std::int64_t>(division, 4); // keep ticks comfortably integral
    if (division > 32767) throw std::logic_error("test score: division too large");

    auto ticks = [&](const Rational& q) {
        Rational t = q * Rational(division);
        if (!t.is_integer()) throw std::logic_error("test score: non-integral ticks");
        return t.num();
    };

    int measures = measure_count_of(s);
    auto starts = measure_starts(s, measures);
    Rational total_len = measure_starts(s, measures + 1).back();

    std::string out = "MThd";
    u32be(out, 6);
    u16be(out, 1);
    u16be(out, static_cast<std::uint16_t>(s.parts.size() + 1));
    u16be(out, static_cast<std::uint16_t>(division));

    // conductor track: time signatures, key, tempo
    std::vector<TrackEvent> conductor;
    int order = 0;
    int num = 4, den = 4;
    for (int m = 1; m <= measures; ++m) {
        auto it = s.time_sigs.find(m);
        if (it == s.time_sigs.end()) continue;
        num = it->second.first;
        den = it->second.second;
        int den_pow = 0;
        while ((1 << den_pow) < den) ++den_pow;
        std::string ev("\xFF\x58\x04", 3);
        ev.push_back(static_cast<char>(num));
        ev.push_back(static_cast<char>(den_pow));
        ev.push_back(24);
        ev.push_back(8);
        conductor.push_back({ticks(starts[static_cast<std::size_t>(m - 1)]), order++, ev});
    }
    if (s.key) {
        std::string ev("\xFF\x59\x02", 3);
        ev.push_back(static_cast<char>(s.key->first));
        ev.push_back(static_cast<char>(s.key->second ? 1 : 0));
        conductor.push_back({0, order++, ev});
    }
    if (s.bpm > 0) {
        std::uint32_t uspq = static_cast<std::uint32_t>(60000000.0 / s.bpm);
        std::string ev("\xFF\x51\x03", 3);
        ev.push_back(static_cast<char>((uspq >> 16) & 0xFF));
        ev.push_back(static_cast<char>((uspq >> 8) & 0xFF));
        ev.push_back(static_cast<char>(uspq & 0xFF));
        conductor.push_back({0, order++, ev});
    }
    out += finish_track(std::move(conductor), ticks(total_len));

    for (std::size_t pi = 0; pi < s.parts.size(); ++pi) {
        const TestPart& part = s.parts[pi];
        int channel = static_cast<int>(pi % 16);
        if (channel == 9) channel = 15; // steer clear of the percussion channel
        std::vector<TrackEvent> events;
        order = 0;
        if (!part.name.empty()) {
            std::string ev("\xFF\x03", 2);
            vlq(ev, static_cast<std::uint32_t>(part.name.size()));
            ev += part.name;
            events.push_back({0, order++, ev});
        }
        if (part.midi_program) {
            std::string ev;
            ev.push_back(static_cast<char>(0xC0 | channel));
            ev.push_back(static_cast<char>(*part.midi_program));
            events.push_back({0, order++, ev});
        }

        Rational at(0);
        Rational tie_started;
        bool tie_open = false;
        int tie_pitch = 0;
        for (const auto& e : s.parts[pi].events) {
            Rational end = at + e.duration;
            if (!e.pitches.empty()) {
                if (e.lyric) {
                    std::string ev("\xFF\x05", 2);
                    vlq(ev, static_cast<std::uint32_t>(e.lyric->size()));
                    ev += *e.lyric;
                    events.push_back({ticks(at), order++, ev});
                }
                if (e.tie_to_next && e.pitches.size() == 1) {
                    if (!tie_open) {
                        tie_open = true;
                        tie_started = at;
                        tie_pitch = e.pitches[0].semitone();
                    }
                    at = end;
                    continue;
                }
                for (const auto& sp : e.pitches) {
                    int pitch = sp.semitone();
                    Rational on_at = at;
                    if (tie_open && pitch == tie_pitch) { on_at = tie_started; }
                    std::string on;
                    on.push_back(static_cast<char>(0x90 | channel));
                    on.push_back(static_cast<char>(pitch));
                    on.push_back(static_cast<char>(velocity));
                    events.push_back({ticks(on_at), order++, on});
                    std::string off;
                    off.push_back(static_cast<char>(0x80 | channel));
                    off.push_back(static_cast<char>(pitch));
                    off.push_back(64);
                    events.push_back({ticks(end), order++, off});
                }
                tie_open = false;
            }
            at = end;
        }
        out += finish_track(std::move(events), ticks(total_len));
    }
    return out;
}

// ---------------------------------------------------------------------------
// MusicXML encoding (partwise)

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline std::string encode_musicxml(const TestScore& s) {
    check_measure_aligned(s);
    int measures = measure_count_of(s);
    auto starts = measure_starts(s, measures + 1);

    std::int64_t divisions = 1;
    for (const auto& p : s.parts)
        for (const auto& e : p.events) divisions = std::lcm(divisions, e.duration.den());

    auto div_units = [&](const Rational& q) {
        Rational t = q * Rational(divisions);
        return t.num();
    };

    std::ostringstream xml;
    xml << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<!DOCTYPE score-partwise PUBLIC \"-//Recordare//DTD MusicXML 4.0 Partwise//EN\" "
           "\"http://www.musicxml.org/dtds/partwise.dtd\">\n"
        << "<score-partwise version=\"4.0\">\n  <part-list>\n";
    for (std::size_t pi = 0; pi < s.parts.size(); ++pi)
        xml << "    <score-part id=\"P" << pi + 1 << "\"><part-name>"
            << xml_escape(s.parts[pi].name) << "</part-name></score-part>\n";
    xml << "  </part-list>\n";

    for (std::size_t pi = 0; pi < s.parts.size(); ++pi) {
        xml << "  <part id=\"P" << pi + 1 << "\">\n";
        const TestPart& part = s.parts[pi];

        std::size_t ei = 0;
        Rational at(0);
        bool tie_pending = false;
        for (int m = 1; m <= measures; ++m) {
            xml << "    <measure number=\"" << m << "\">\n";
            bool first_measure = (m == 1);
            auto ts = s.time_sigs.find(m);
            if (first_measure || ts != s.time_sigs.end()) {
                xml << "      <attributes>\n";
                if (first_measure) xml << "        <divisions>" << divisions << "</divisions>\n";
                if (first_measure && s.key)
                    xml << "        <key><fifths>" << s.key->first << "</fifths><mode>"
                        << (s.key->second ? "minor" : "major") << "</mode></key>\n";
                if (ts != s.time_sigs.end())
                    xml << "        <time><beats>" << ts->second.first << "</beats><beat-type>"
                        << ts->second.second << "</beat-type></time>\n";
                xml << "      </attributes>\n";
            }
            if (first_measure && s.bpm > 0)
                xml << "      <direction><direction-type><metronome><beat-unit>quarter</beat-unit>"
                       "<per-minute>" << s.bpm << "</per-minute></metronome></direction-type>"
                       "</direction>\n";

            Rational measure_end = starts[static_cast<std::size_t>(m)];
            while (ei < part.events.size() && at < measure_end) {
                const TestEvent& e = part.events[ei];
                if (e.pitches.empty()) {
                    xml << "      <note><rest/><duration>" << div_units(e.duration)
                        << "</duration></note>\n";
                } else {
                    for (std::size_t k = 0; k < e.pitches.size(); ++k) {
                        const SpelledPitch& sp = e.pitches[k];
                        xml << "      <note>";
                        if (k > 0) xml << "<chord/>";
                        xml << "<pitch><step>" << sp.step << "</step>";
                        if (sp.alter != 0) xml << "<alter>" << sp.alter << "</alter>";
                        xml << "<octave>" << sp.octave << "</octave></pitch>"
                            << "<duration>" << div_units(e.duration) << "</duration>";
                        if (tie_pending && k == 0) xml << "<tie type=\"stop\"/>";
                        if (e.tie_to_next && k == 0) xml << "<tie type=\"start\"/>";
                        if (e.lyric && k == 0) {
                            std::string text = *e.lyric;
                            std::string syllabic = "single";
                            if (!text.empty() && text.back() == '-') {
                                text.pop_back();
                                syllabic = "begin";
                            }
                            xml << "<lyric><syllabic>" << syllabic << "</syllabic><text>"
                                << xml_escape(text) << "</text></lyric>";
                        }
                        xml << "</note>\n";
                    }
                    tie_pending = e.tie_to_next;
                }
                at += e.duration;
                ++ei;
            }
            xml << "    </measure>\n";
        }
        xml << "  </part>\n";
    }
    xml << "</score-partwise>\n";
    return xml.str();
}

// ---------------------------------------------------------------------------
// Humdrum **kern encoding

namespace kern_enc {

inline std::string recip_token(const Rational& dur) {
    static const std::int64_t bases[] = {1, 2, 4, 8, 16, 32, 64, 3, 6, 12, 24, 48};
    for (std::int64_t base : bases) {
        Rational value(4, base);
        Rational dot_add = value;
        std::string dots;
        for (int d = 0; d <= 2; ++d) {
            if (value == dur) return std::to_string(base) + dots;
            dot_add = dot_add / Rational(2);
            value += dot_add;
            dots += '.';
        }
    }
    // breve and longa
    if (dur == Rational(8)) return "0";
    if (dur == Rational(16)) return "00";
    throw std::logic_error("test score: duration not recip-expressible: " + dur.str());
}

inline std::string pitch_token(const SpelledPitch& sp) {
    std::string out;
    char lower = static_cast<char>(sp.step - 'A' + 'a');
    if (sp.octave >= 4) out.append(static_cast<std::size_t>(sp.octave - 3), lower);
    else out.append(static_cast<std::size_t>(4 - sp.octave), sp.step);
    if (sp.alter > 0) out.append(static_cast<std::size_t>(sp.alter), '#');
    if (sp.alter < 0) out.append(static_cast<std::size_t>(-sp.alter), '-');
    return out;
}

} // namespace kern_enc

inline std::string encode_kern(const TestScore& s) {
    check_measure_aligned(s);
    int measures = measure_count_of(s);
    auto starts = measure_starts(s, measures + 1);
    const std::size_t spines = s.parts.size();
    if (spines == 0) throw std::logic_error("test score: kern needs at least one part");

    // rows are the union of event onsets; barlines and signature changes
    // interleave at measure starts
    std::map<Rational, std::vector<std::string>> data_rows; // onset -> token per spine
    std::vector<std::map<Rational, std::string>> spine_tokens(spines);

    for (std::size_t pi = 0; pi < spines; ++pi) {
        Rational at(0);
        bool tie_open = false;
        for (const auto& e : s.parts[pi].events) {
            std::string token;
            if (e.pitches.empty()) {
                token = kern_enc::recip_token(e.duration) + "r";
            } else {
                for (std::size_t k = 0; k < e.pitches.size(); ++k) {
                    if (k > 0) token += ' ';
                    std::string one;
                    if (e.pitches.size() == 1) {
                        if (tie_open && e.tie_to_next) one += ""; // middle handled below
                        else if (e.tie_to_next) one += "[";
                    }
                    one += kern_enc::recip_token(e.duration) + kern_enc::pitch_token(e.pitches[k]);
                    if (e.pitches.size() == 1) {
                        if (tie_open && e.tie_to_next) one += "_";
                        else if (tie_open && !e.tie_to_next) one += "]";
                    }
                    token += one;
                }
                tie_open = e.tie_to_next && e.pitches.size() == 1;
            }
            spine_tokens[pi][at] = token;
            at += e.duration;
        }
    }

    std::set<Rational> onsets;
    for (const auto& m : spine_tokens)
        for (const auto& [at, tok] : m) onsets.insert(at);

    std::ostringstream out;
    auto full_row = [&](const std::string& token) {
        for (std::size_t i = 0; i < spines; ++i) out << (i ? "\t" : "") << token;
        out << "\n";
    };

    full_row("**kern");
    for (std::size_t pi = 0; pi < spines; ++pi)
        out << (pi ? "\t" : "") << "*I\"" << s.parts[pi].name;
    out << "\n";
    if (s.key) {
        static const char* sharp_names[] = {"f#", "c#", "g#", "d#", "a#", "e#", "b#"};
        static const char* flat_names[] = {"b-", "e-", "a-", "d-", "g-", "c-", "f-"};
        std::string sig = "*k[";
        int fifths = s.key->first;
        for (int i = 0; i < std::abs(fifths) && i < 7; ++i)
            sig += (fifths > 0 ? sharp_names[i] : flat_names[i]);
        sig += "]";
        full_row(sig);
        // tonic letter: major keys C G D A E B F# ...; keep it simple via circle of fifths
        static const int tonic_pc_major[15] = {0, 7, 2, 9, 4, 11, 6, 1, 5, 10, 3, 8, 1, 6, 11};
        static const char* pc_names_up[12] = {"C", "C#", "D", "D#", "E", "F",
                                              "F#", "G", "G#", "A", "A#", "B"};
        int idx = fifths >= 0 ? fifths : 7 - fifths;
        int pc = tonic_pc_major[std::min(idx, 14)];
        if (s.key->second) pc = (pc + 9) % 12; // relative minor
        std::string designation = pc_names_up[pc];
        if (s.key->second)
            for (auto& c : designation) c = static_cast<char>(std::tolower(c));
        full_row("*" + designation + ":");
    }
    if (s.bpm > 0) full_row("*MM" + std::to_string(static_cast<int>(s.bpm)));

    int next_measure = 1;
    int num = 4, den = 4;
    for (const auto& at : onsets) {
        // barline (and any signature change) first
        while (next_measure <= measures &&
               starts[static_cast<std::size_t>(next_measure - 1)] <= at) {
            auto ts = s.time_sigs.find(next_measure);
            if (ts != s.time_sigs.end()) {
                num = ts->second.first;
                den = ts->second.second;
                full_row("*M" + std::to_string(num) + "/" + std::to_string(den));
            }
            full_row("=" + std::to_string(next_measure));
            ++next_measure;
        }
        for (std::size_t pi = 0; pi < spines; ++pi) {
            auto it = spine_tokens[pi].find(at);
            out << (pi ? "\t" : "") << (it != spine_tokens[pi].end() ? it->second : ".");
        }
        out << "\n";
    }
    full_row("==");
    full_row("*-");
    return out.str();
}

} // namespace testscores
