#pragma once

#include <cstdint>
#include <deque>
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

namespace midi_detail {

struct Reader {
    std::string_view s;
    std::size_t pos = 0;

    bool eof() const { return pos >= s.size(); }
    std::size_t remaining() const { return s.size() - pos; }

    std::uint8_t u8() { return static_cast<std::uint8_t>(s[pos++]); }
    std::uint16_t u16() { std::uint16_t v = (u8() << 8); return v | u8(); }
    std::uint32_t u32() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | u8();
        return v;
    }
    bool need(std::size_t n) const { return remaining() >= n; }

    // variable-length quantity, at most 4 bytes per the SMF spec
    std::optional<std::uint32_t> vlq() {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            if (eof()) return std::nullopt;
            std::uint8_t b = u8();
            v = (v << 7) | (b & 0x7F);
            if (!(b & 0x80)) return v;
        }
        return std::nullopt;
    }
};

struct PendingNote {
    std::int64_t tick;
    int velocity;
};

} // namespace midi_detail

// Standard MIDI File parser, formats 0 and 1. Onsets are ticks / division
// in quarters; note-on with velocity 0 is a note-off; running status honored.
inline ParseResult<Score> parse_midi(std::string_view bytes, const std::string& path) {
    using namespace midi_detail;
    parser_invocations().fetch_add(1, std::memory_order_relaxed);

    auto header_err = [&](std::string detail, std::size_t off) {
        return ParseError{path, ParseErrorKind::malformed_header, std::move(detail),
                          static_cast<std::int64_t>(off)};
    };
    auto event_err = [&](std::string detail, std::size_t off) {
        return ParseError{path, ParseErrorKind::malformed_event, std::move(detail),
                          static_cast<std::int64_t>(off)};
    };

    Reader r{bytes};
    if (!r.need(14)) return header_err("file shorter than an SMF header", 0);
    if (bytes.substr(0, 4) != "MThd") return header_err("bad magic, expected MThd", 0);
    r.pos = 4;
    std::uint32_t header_len = r.u32();
    if (header_len < 6 || !r.need(header_len)) return header_err("bad MThd length", 4);
    std::uint16_t format = r.u16();
    std::uint16_t declared_tracks = r.u16();
    std::uint16_t division = r.u16();
    r.pos = 8 + header_len;

    if (format == 2)
        return ParseError{path, ParseErrorKind::unsupported_construct, "SMF format 2", 8};
    if (format > 2) return header_err("unknown SMF format " + std::to_string(format), 8);
    if (division & 0x8000) return header_err("SMPTE division not supported", 12);
    if (division == 0) return header_err("zero ticks per quarter", 12);

    // collected data, keyed by (track, channel)
    struct RawNote {
        std::int64_t on_tick;
        std::int64_t off_tick;
        int pitch;
        int velocity;
    };
    std::map<std::pair<int, int>, std::vector<RawNote>> notes;
    std::map<std::pair<int, int>, std::vector<std::pair<std::int64_t, int>>> program_events;
    std::map<int, std::string> track_names;
    std::map<int, std::vector<std::pair<std::int64_t, std::string>>> track_lyrics;
    std::vector<std::pair<std::int64_t, double>> tempos;
    std::vector<std::tuple<std::int64_t, int, int>> timesigs;
    std::vector<std::tuple<std::int64_t, int, bool>> keysigs;

    int track_index = 0;
    while (!r.eof()) {
        if (!r.need(8)) {
            // trailing garbage shorter than a chunk header: tolerate if we
            // already read the declared number of tracks
            if (track_index >= declared_tracks) break;
            return event_err("truncated chunk header", r.pos);
        }
        std::string_view chunk_id = bytes.substr(r.pos, 4);
        r.pos += 4;
        std::uint32_t chunk_len = r.u32();
        if (!r.need(chunk_len)) return event_err("chunk length runs past end of file", r.pos - 4);
        std::size_t chunk_end = r.pos + chunk_len;
        if (chunk_id != "MTrk") { r.pos = chunk_end; continue; }

        std::int64_t tick = 0;
        std::uint8_t running_status = 0;
        // FIFO matching of note-ons to note-offs per (channel, pitch)
        std::map<std::pair<int, int>, std::deque<PendingNote>> pending;

        bool end_of_track = false;
        while (r.pos < chunk_end && !end_of_track) {
            auto delta = r.vlq();
            if (!delta || r.pos > chunk_end) return event_err("bad delta time", r.pos);
            tick += *delta;

            if (r.pos >= chunk_end) return event_err("event missing after delta time", r.pos);
            std::uint8_t status = static_cast<std::uint8_t>(bytes[r.pos]);
            if (status >= 0x80) {
                ++r.pos;
                // sysex and meta events cancel running status
                running_status = status < 0xF0 ? status : 0;
            } else {
                if (running_status == 0) return event_err("data byte without running status", r.pos);
                status = running_status;
            }

            auto data1 = [&]() -> std::optional<std::uint8_t> {
                if (r.pos >= chunk_end) return std::nullopt;
                return r.u8();
            };

            if (status < 0xF0) {
                int channel = status & 0x0F;
                int kind = status >> 4;
                auto a = data1();
                if (!a) return event_err("truncated channel event", r.pos);
                switch (kind) {
                    case 0x9: { // note on (velocity 0 means off)
                        auto b = data1();
                        if (!b) return event_err("truncated note-on", r.pos);
                        int pitch = *a & 0x7F;
                        int vel = *b & 0x7F;
                        if (vel > 0) {
                            pending[{channel, pitch}].push_back({tick, vel});
                        } else {
                            auto& q = pending[{channel, pitch}];
                            if (!q.empty()) {
                                notes[{track_index, channel}].push_back(
                                    {q.front().tick, tick, pitch, q.front().velocity});
                                q.pop_front();
                            }
                        }
                        break;
                    }
                    case 0x8: { // note off
                        auto b = data1();
                        if (!b) return event_err("truncated note-off", r.pos);
                        int pitch = *a & 0x7F;
                        auto& q = pending[{channel, pitch}];
                        if (!q.empty()) {
                            notes[{track_index, channel}].push_back(
                                {q.front().tick, tick, pitch, q.front().velocity});
                            q.pop_front();
                        }
                        break;
                    }
                    case 0xC: // program change
                        program_events[{track_index, channel}].emplace_back(tick, *a & 0x7F);
                        break;
                    case 0xD: // channel aftertouch, one data byte
                        break;
                    case 0xA:
                    case 0xB:
                    case 0xE: { // two data bytes
                        if (!data1()) return event_err("truncated channel event", r.pos);
                        break;
                    }
                    default:
                        return event_err("bad status byte", r.pos);
                }
            } else if (status == 0xFF) {
                auto type = data1();
                auto len = r.vlq();
                if (!type || !len || r.pos + *len > chunk_end)
                    return event_err("truncated meta event", r.pos);
                std::string_view payload = bytes.substr(r.pos, *len);
                r.pos += *len;
                switch (*type) {
                    case 0x2F:
                        end_of_track = true;
                        break;
                    case 0x51:
                        if (*len >= 3) {
                            std::uint32_t uspq = (std::uint32_t(std::uint8_t(payload[0])) << 16) |
                                                 (std::uint32_t(std::uint8_t(payload[1])) << 8) |
                                                 std::uint32_t(std::uint8_t(payload[2]));
                            if (uspq > 0) tempos.emplace_back(tick, 60000000.0 / uspq);
                        }
                        break;
                    case 0x58:
                        if (*len >= 2) {
                            int num = std::uint8_t(payload[0]);
                            int den_pow = std::uint8_t(payload[1]);
                            if (num > 0 && den_pow <= 6)
                                timesigs.emplace_back(tick, num, 1 << den_pow);
                        }
                        break;
                    case 0x59:
                        if (*len >= 2) {
                            int sf = static_cast<std::int8_t>(payload[0]);
                            bool minor = payload[1] != 0;
                            if (sf >= -7 && sf <= 7) keysigs.emplace_back(tick, sf, minor);
                        }
                        break;
                    case 0x03:
                        if (track_names.find(track_index) == track_names.end())
                            track_names[track_index] = decode_text(payload);
                        break;
                    case 0x05:
                        track_lyrics[track_index].emplace_back(tick, decode_text(payload));
                        break;
                    default:
                        break;
                }
            } else if (status == 0xF0 || status == 0xF7) {
                auto len = r.vlq();
                if (!len || r.pos + *len > chunk_end) return event_err("truncated sysex", r.pos);
                r.pos += *len;
            } else {
                return event_err("unexpected system status byte", r.pos);
            }
        }

        // dangling note-ons close at the end of the track
        std::int64_t track_end = tick;
        for (auto& [key, q] : pending)
            for (const auto& pn : q)
                if (pn.tick < track_end)
                    notes[{track_index, key.first}].push_back({pn.tick, track_end, key.second, pn.velocity});

        r.pos = chunk_end;
        ++track_index;
    }

    if (track_index == 0) return header_err("no track chunks", 14);

    ScoreBuilder builder(SourceFormat::midi);
    auto to_q = [&](std::int64_t t) { return Rational(t, division); };

    for (const auto& [key, raw_notes] : notes) {
        auto [track, channel] = key;
        std::vector<NoteEvent> events;
        std::int64_t first_tick = INT64_MAX;
        for (const auto& n : raw_notes) {
            if (n.off_tick <= n.on_tick) continue;
            NoteEvent ev;
            ev.onset = to_q(n.on_tick);
            ev.duration = to_q(n.off_tick - n.on_tick);
            ev.midi_pitch = n.pitch;
            ev.velocity = n.velocity;
            events.push_back(ev);
            first_tick = std::min(first_tick, n.on_tick);
        }
        if (events.empty()) continue; // only (track, channel) pairs that carry notes become parts

        Part& part = builder.add_part(track_names.count(track) ? track_names[track] : "");
        part.percussion = (channel == 9);
        part.notes = std::move(events);

        // program in effect at the part's first note; default 0
        int program = 0;
        auto pit = program_events.find(key);
        if (pit != program_events.end()) {
            for (const auto& [t, prog] : pit->second)
                if (t <= first_tick) program = prog;
        }
        part.midi_program = program;

        // lyric metas attach to the same-track part holding a note at that tick
        auto lit = track_lyrics.find(track);
        if (lit != track_lyrics.end()) {
            for (const auto& [t, text] : lit->second) {
                bool has_onset = false;
                for (const auto& n : part.notes)
                    if (n.onset == to_q(t)) { has_onset = true; break; }
                if (has_onset) part.lyrics.push_back({to_q(t), text});
            }
        }
    }

    for (const auto& [t, bpm] : tempos) builder.add_tempo(to_q(t), bpm, TempoSource::midi_meta);
    for (const auto& [t, sf, minor] : keysigs) builder.add_key_signature(to_q(t), sf, minor);

    // measure structure from the time-signature map; 4/4 assumed at 0
    std::map<std::int64_t, std::pair<int, int>> sig_at;
    sig_at[0] = {4, 4};
    for (const auto& [t, num, den] : timesigs) sig_at[t] = {num, den};

    std::int64_t last_tick = 0;
    for (const auto& [key, raw_notes] : notes)
        for (const auto& n : raw_notes) last_tick = std::max(last_tick, n.on_tick);

    auto it = sig_at.begin();
    while (it != sig_at.end()) {
        auto next = std::next(it);
        Rational seg_start = to_q(it->first);
        Rational measure_len(4 * it->second.first, it->second.second);
        Rational seg_end = next != sig_at.end() ? to_q(next->first) : to_q(last_tick) + Rational(1);
        for (Rational m = seg_start; m < seg_end; m += measure_len) {
            if (next == sig_at.end() && m > to_q(last_tick) && m != seg_start) break;
            builder.add_measure(m, it->second.first, it->second.second);
        }
        it = next;
    }

    return builder.finish(path, kParserVersion);
}

} // namespace notefeat
