#pragma once

#include <algorithm>
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
#include "notefeat/xml.hpp"
#include "notefeat/zip.hpp"

namespace notefeat {

// Score plus any harmony annotations embedded in the source file. MIDI and
// kern sources always produce an empty annotation list.
struct ParsedScore {
    Score score;
    std::vector<HarmonicAnnotation> annotations;
};

namespace musicxml_detail {

// conventional tempo-word values, used when a direction carries only text
inline std::optional<double> tempo_word_bpm(std::string_view words) {
    static const std::pair<const char*, double> table[] = {
        {"prestissimo", 200}, {"presto", 184},   {"vivace", 168},   {"allegretto", 116},
        {"allegro", 132},     {"moderato", 108}, {"andantino", 94}, {"andante", 92},
        {"adagietto", 74},    {"adagio", 71},    {"larghetto", 66}, {"lento", 52},
        {"largo", 50},        {"grave", 35}};
    std::string lower = to_lower(words);
    for (const auto& [word, bpm] : table)
        if (lower.find(word) != std::string::npos) return bpm;
    return std::nullopt;
}

inline double beat_unit_quarters(std::string_view unit) {
    if (unit == "whole") return 4.0;
    if (unit == "half") return 2.0;
    if (unit == "quarter") return 1.0;
    if (unit == "eighth") return 0.5;
    if (unit == "16th") return 0.25;
    if (unit == "32nd") return 0.125;
    return 1.0;
}

struct RawNote {
    Rational onset;
    Rational duration;
    SpelledPitch spelled;
    int midi_pitch = 60;
    bool grace = false;
    bool tie_start = false;
    bool tie_stop = false;
};

// Tie chains collapse to a single note: a stop-note of matching pitch whose
// onset continues the chain is absorbed into the chain head. Heads of chains
// that never close keep tie_to_next set.
inline std::vector<NoteEvent> merge_ties(std::vector<RawNote> notes) {
    std::stable_sort(notes.begin(), notes.end(),
                     [](const RawNote& a, const RawNote& b) { return a.onset < b.onset; });
    struct Open { std::size_t head; Rational expected; };
    std::map<int, std::vector<Open>> open; // pitch -> open chains
    std::vector<NoteEvent> out;
    out.reserve(notes.size());

    for (const RawNote& n : notes) {
        if (n.tie_stop) {
            auto it = open.find(n.midi_pitch);
            if (it != open.end()) {
                auto chain = std::find_if(it->second.begin(), it->second.end(),
                                          [&](const Open& o) { return o.expected == n.onset; });
                if (chain != it->second.end()) {
                    out[chain->head].duration += n.duration;
                    if (n.tie_start) chain->expected = n.onset + n.duration;
                    else it->second.erase(chain);
                    continue;
                }
            }
        }
        NoteEvent ev;
        ev.onset = n.onset;
        ev.duration = n.duration;
        ev.midi_pitch = n.midi_pitch;
        ev.spelled_pitch = n.spelled;
        ev.grace = n.grace;
        out.push_back(ev);
        if (n.tie_start) open[n.midi_pitch].push_back({out.size() - 1, n.onset + n.duration});
    }
    for (const auto& [pitch, chains] : open)
        for (const Open& o : chains) out[o.head].tie_to_next = true;
    return out;
}

} // namespace musicxml_detail

// MusicXML partwise parser; also unpacks .mxl ZIP containers through their
// manifest. Produces the Score plus harmony annotations when the file
// carries <harmony> elements.
inline ParseResult<ParsedScore> parse_musicxml_full(std::string_view bytes, const std::string& path) {
    using namespace musicxml_detail;
    parser_invocations().fetch_add(1, std::memory_order_relaxed);

    auto header_err = [&](std::string detail) {
        return ParseError{path, ParseErrorKind::malformed_header, std::move(detail), std::nullopt};
    };
    auto event_err = [&](std::string detail) {
        return ParseError{path, ParseErrorKind::malformed_event, std::move(detail), std::nullopt};
    };

    std::string unpacked;
    std::string_view xml_bytes = bytes;
    if (ZipReader::looks_like_zip(bytes)) {
        try {
            ZipReader zip(bytes);
            std::string root_file;
            if (zip.contains("META-INF/container.xml")) {
                XmlNode manifest = XmlParser::parse(decode_text(zip.read("META-INF/container.xml")));
                if (const XmlNode* rootfiles = manifest.child("rootfiles"))
                    if (const XmlNode* rootfile = rootfiles->child("rootfile"))
                        root_file = std::string(rootfile->attr("full-path"));
            }
            if (root_file.empty() || !zip.contains(root_file)) {
                // fall back to the first score-looking entry outside META-INF
                for (const auto& name : zip.names()) {
                    if (name.rfind("META-INF/", 0) == 0) continue;
                    if (name.ends_with(".xml") || name.ends_with(".musicxml")) { root_file = name; break; }
                }
            }
            if (root_file.empty()) return header_err("mxl container has no score file");
            unpacked = zip.read(root_file);
            xml_bytes = unpacked;
        } catch (const ZipError& e) {
            return header_err(std::string("mxl container: ") + e.what());
        } catch (const XmlParseError& e) {
            return header_err(std::string("mxl manifest: ") + e.what());
        }
    }

    std::string text = decode_text(xml_bytes);
    XmlNode root;
    try {
        root = XmlParser::parse(text);
    } catch (const XmlParseError& e) {
        return ParseError{path, ParseErrorKind::malformed_header, e.what(),
                          static_cast<std::int64_t>(e.offset)};
    }

    if (root.name == "score-timewise")
        return ParseError{path, ParseErrorKind::unsupported_construct, "timewise documents", std::nullopt};
    if (root.name != "score-partwise") return header_err("root element is not score-partwise");

    std::map<std::string, std::string> part_names;
    if (const XmlNode* list = root.child("part-list")) {
        for (const auto& child : list->children)
            if (child.name == "score-part")
                part_names[std::string(child.attr("id"))] = std::string(child.child_text("part-name"));
    }

    auto parts = root.all("part");
    if (parts.empty()) return header_err("no part elements");

    std::size_t measure_count = 0;
    for (const XmlNode* part : parts)
        measure_count = std::max(measure_count, part->all("measure").size());
    if (measure_count == 0) return header_err("no measures");

    // pass 1: content length of every measure (max cursor offset over parts)
    // and declared signatures, taken from the first declaring part
    std::vector<Rational> measure_len(measure_count, Rational(0));
    std::vector<std::optional<std::pair<int, int>>> measure_ts(measure_count);
    std::vector<std::optional<std::pair<int, std::optional<bool>>>> measure_key(measure_count);

    for (const XmlNode* part : parts) {
        std::int64_t divisions = 1;
        auto measures = part->all("measure");
        for (std::size_t mi = 0; mi < measures.size(); ++mi) {
            Rational cursor(0), max_off(0);
            for (const XmlNode& el : measures[mi]->children) {
                if (el.name == "attributes") {
                    if (auto d = parse_int(el.child_text("divisions")); d && *d > 0) divisions = *d;
                    if (const XmlNode* time_el = el.child("time")) {
                        auto num = parse_int(time_el->child_text("beats"));
                        auto den = parse_int(time_el->child_text("beat-type"));
                        if (num && den && *num > 0 && *den > 0 && !measure_ts[mi])
                            measure_ts[mi] = {static_cast<int>(*num), static_cast<int>(*den)};
                    }
                    if (const XmlNode* key_el = el.child("key")) {
                        if (auto fifths = parse_int(key_el->child_text("fifths")); fifths && !measure_key[mi]) {
                            std::optional<bool> minor;
                            std::string_view mode = key_el->child_text("mode");
                            if (mode == "minor") minor = true;
                            else if (mode == "major") minor = false;
                            measure_key[mi] = {static_cast<int>(*fifths), minor};
                        }
                    }
                } else if (el.name == "note") {
                    if (el.has("grace") || el.has("chord")) continue;
                    auto d = parse_int(el.child_text("duration"));
                    if (!d || *d <= 0) {
                        if (!el.has("rest") && !el.has("pitch") && !el.has("unpitched"))
                            return event_err("note without pitch or rest");
                        return event_err("note without a valid duration");
                    }
                    cursor += Rational(*d, divisions);
                    if (cursor > max_off) max_off = cursor;
                } else if (el.name == "backup") {
                    if (auto d = parse_int(el.child_text("duration")); d && *d > 0) {
                        cursor -= Rational(*d, divisions);
                        if (cursor.is_negative()) cursor = Rational(0);
                    }
                } else if (el.name == "forward") {
                    if (auto d = parse_int(el.child_text("duration")); d && *d > 0) {
                        cursor += Rational(*d, divisions);
                        if (cursor > max_off) max_off = cursor;
                    }
                }
            }
            if (max_off > measure_len[mi]) measure_len[mi] = max_off;
        }
    }

    // empty measures take their nominal length so starts stay strictly increasing
    {
        int num = 4, den = 4;
        for (std::size_t mi = 0; mi < measure_count; ++mi) {
            if (measure_ts[mi]) { num = measure_ts[mi]->first; den = measure_ts[mi]->second; }
            if (measure_len[mi].is_zero()) measure_len[mi] = Rational(4 * num, den);
        }
    }
    std::vector<Rational> measure_start(measure_count, Rational(0));
    for (std::size_t mi = 1; mi < measure_count; ++mi)
        measure_start[mi] = measure_start[mi - 1] + measure_len[mi - 1];

    ScoreBuilder builder(SourceFormat::musicxml);
    std::vector<HarmonicAnnotation> annotations;

    // pass 2: notes, directions and harmony, with measure starts known
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const XmlNode* part_el = parts[pi];
        std::string part_id(part_el->attr("id"));
        std::string name = part_names.count(part_id) ? part_names[part_id] : part_id;
        Part& part = builder.add_part(name);

        std::int64_t divisions = 1;
        std::vector<RawNote> raw;
        auto measures = part_el->all("measure");
        for (std::size_t mi = 0; mi < measures.size(); ++mi) {
            Rational base = measure_start[mi];
            Rational cursor(0);
            Rational prev_onset(0);
            for (const XmlNode& el : measures[mi]->children) {
                if (el.name == "attributes") {
                    if (auto d = parse_int(el.child_text("divisions")); d && *d > 0) divisions = *d;
                } else if (el.name == "note") {
                    bool grace = el.has("grace");
                    bool chord = el.has("chord");
                    bool rest = el.has("rest") || el.has("unpitched");
                    Rational duration(0);
                    if (!grace) {
                        auto d = parse_int(el.child_text("duration"));
                        if (!d || *d <= 0) {
                            if (!rest && !el.has("pitch")) return event_err("note without pitch or rest");
                            return event_err("note without a valid duration");
                        }
                        duration = Rational(*d, divisions);
                    }
                    if (rest) {
                        if (!chord && !grace) cursor += duration;
                        continue;
                    }
                    const XmlNode* pitch_el = el.child("pitch");
                    if (!pitch_el) return event_err("note without pitch or rest");
                    std::string_view step = trim(pitch_el->child_text("step"));
                    auto octave = parse_int(pitch_el->child_text("octave"));
                    auto alter = parse_double(pitch_el->child_text("alter", "0"));
                    if (step.size() != 1 || step[0] < 'A' || step[0] > 'G' || !octave)
                        return event_err("malformed pitch element");

                    RawNote n;
                    n.spelled.step = step[0];
                    n.spelled.alter = std::clamp(static_cast<int>(alter.value_or(0)), -2, 2);
                    n.spelled.octave = static_cast<int>(std::clamp<std::int64_t>(*octave, 0, 9));
                    int midi = n.spelled.semitone();
                    while (midi > 127) midi -= 12;
                    while (midi < 0) midi += 12;
                    n.midi_pitch = midi;
                    n.grace = grace;
                    n.duration = grace ? Rational(0) : duration;
                    n.onset = base + (chord ? prev_onset : cursor);
                    for (const auto& tie : el.children)
                        if (tie.name == "tie") {
                            if (tie.attr("type") == "start") n.tie_start = true;
                            if (tie.attr("type") == "stop") n.tie_stop = true;
                        }
                    if (const XmlNode* lyric_el = el.child("lyric")) {
                        std::string syl(lyric_el->child_text("text"));
                        std::string_view syllabic = lyric_el->child_text("syllabic", "single");
                        if (!syl.empty()) {
                            if (syllabic == "begin" || syllabic == "middle") syl += "-";
                            part.lyrics.push_back({n.onset, std::move(syl)});
                        }
                    }
                    if (!chord && !grace) {
                        prev_onset = cursor;
                        cursor += duration;
                    }
                    raw.push_back(n);
                } else if (el.name == "backup") {
                    if (auto d = parse_int(el.child_text("duration")); d && *d > 0) {
                        cursor -= Rational(*d, divisions);
                        if (cursor.is_negative()) cursor = Rational(0);
                    }
                } else if (el.name == "forward") {
                    if (auto d = parse_int(el.child_text("duration")); d && *d > 0)
                        cursor += Rational(*d, divisions);
                } else if (el.name == "direction") {
                    for (const auto& dt : el.children) {
                        if (dt.name != "direction-type") continue;
                        for (const auto& item : dt.children) {
                            if (item.name == "dynamics") {
                                for (const auto& mark_el : item.children) {
                                    auto mark = dynamic_mark_from_string(mark_el.name);
                                    if (mark) builder.add_dynamic(base + cursor, static_cast<int>(pi), *mark);
                                    else unknown_dynamic_marks().fetch_add(1, std::memory_order_relaxed);
                                }
                            } else if (item.name == "metronome") {
                                auto per_minute = parse_double(item.child_text("per-minute"));
                                if (per_minute && *per_minute > 0) {
                                    double unit = beat_unit_quarters(item.child_text("beat-unit", "quarter"));
                                    builder.add_tempo(base + cursor, *per_minute * unit,
                                                      TempoSource::metronome_mark);
                                }
                            } else if (item.name == "words") {
                                if (auto bpm = tempo_word_bpm(item.text))
                                    builder.add_tempo(base + cursor, *bpm, TempoSource::tempo_word);
                            }
                        }
                    }
                } else if (el.name == "harmony") {
                    std::string label;
                    if (const XmlNode* root_el = el.child("root")) {
                        label = std::string(trim(root_el->child_text("root-step")));
                        if (auto a = parse_int(root_el->child_text("root-alter", "0")); a && *a != 0)
                            label += (*a > 0) ? std::string(static_cast<std::size_t>(*a), '#')
                                              : std::string(static_cast<std::size_t>(-*a), 'b');
                    }
                    if (!label.empty()) {
                        std::string kind(trim(el.child_text("kind")));
                        if (!kind.empty()) label += ":" + kind;
                        HarmonicAnnotation ann;
                        ann.measure_index = static_cast<int>(mi) + 1;
                        ann.beat = cursor.to_double();
                        ann.label = std::move(label);
                        annotations.push_back(ann);
                    }
                }
            }
        }
        part.notes = merge_ties(std::move(raw));
    }

    // measure map: content-derived starts, declared signatures carried forward
    int ts_num = 4, ts_den = 4;
    for (std::size_t mi = 0; mi < measure_count; ++mi) {
        if (measure_ts[mi]) { ts_num = measure_ts[mi]->first; ts_den = measure_ts[mi]->second; }
        builder.add_measure(measure_start[mi], ts_num, ts_den);
        if (measure_key[mi])
            builder.add_key_signature(measure_start[mi], measure_key[mi]->first, measure_key[mi]->second);
    }

    std::sort(annotations.begin(), annotations.end(), [](const auto& a, const auto& b) {
        return std::tie(a.measure_index, a.beat, a.label) < std::tie(b.measure_index, b.beat, b.label);
    });
    annotations.erase(std::unique(annotations.begin(), annotations.end()), annotations.end());

    ParsedScore out;
    out.annotations = std::move(annotations);
    out.score = builder.finish(path, kParserVersion);
    return out;
}

inline ParseResult<Score> parse_musicxml(std::string_view bytes, const std::string& path) {
    auto full = parse_musicxml_full(bytes, path);
    if (!full) return full.error();
    return std::move(full.value().score);
}

} // namespace notefeat
