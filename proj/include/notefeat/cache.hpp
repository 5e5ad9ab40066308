#pragma once

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "notefeat/musicxml.hpp" // ParsedScore
#include "notefeat/score.hpp"
#include "notefeat/sha256.hpp"

namespace notefeat {

struct CacheKey {
    std::string content_hash; // 64 hex chars of the SHA-256 of the raw bytes
    std::string parser_version;
    SourceFormat format = SourceFormat::midi;

    bool operator==(const CacheKey&) const = default;
};

inline CacheKey cache_key(std::string_view bytes, const std::string& parser_version,
                          SourceFormat format) {
    return CacheKey{Sha256::hex_digest(bytes), parser_version, format};
}

namespace cache_detail {

inline constexpr char kMagic[4] = {'N', 'F', 'S', 'C'};
inline constexpr std::uint16_t kFormatVersion = 1;

struct CorruptEntry {};

struct Writer {
    std::string buf;

    void raw(const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); }
    void u8(std::uint8_t v) { raw(&v, 1); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void i64(std::int64_t v) { raw(&v, 8); }
    void f64(double v) { auto b = std::bit_cast<std::uint64_t>(v); raw(&b, 8); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void rational(const Rational& r) { i64(r.num()); i64(r.den()); }
};

struct ReaderB {
    std::string_view s;
    std::size_t pos = 0;

    void need(std::uint64_t n) const { if (n > s.size() - pos) throw CorruptEntry{}; }
    void raw(void* p, std::size_t n) { need(n); std::memcpy(p, s.data() + pos, n); pos += n; }
    std::uint8_t u8() { std::uint8_t v; raw(&v, 1); return v; }
    std::uint16_t u16() { std::uint16_t v; raw(&v, 2); return v; }
    std::uint32_t u32() { std::uint32_t v; raw(&v, 4); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, 8); return v; }
    std::int64_t i64() { std::int64_t v; raw(&v, 8); return v; }
    double f64() { std::uint64_t b = u64(); return std::bit_cast<double>(b); }
    std::string str() {
        std::uint32_t n = u32();
        if (n > (1u << 28)) throw CorruptEntry{};
        need(n);
        std::string out(s.substr(pos, n));
        pos += n;
        return out;
    }
    Rational rational() {
        std::int64_t num = i64();
        std::int64_t den = i64();
        if (den <= 0) throw CorruptEntry{};
        return Rational(num, den);
    }
};

inline void write_note(Writer& w, const NoteEvent& n) {
    w.rational(n.onset);
    w.rational(n.duration);
    w.u8(static_cast<std::uint8_t>(n.midi_pitch));
    w.u8(n.spelled_pitch ? 1 : 0);
    if (n.spelled_pitch) {
        w.u8(static_cast<std::uint8_t>(n.spelled_pitch->step));
        w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(n.spelled_pitch->alter)));
        w.u8(static_cast<std::uint8_t>(static_cast<std::int8_t>(n.spelled_pitch->octave)));
    }
    w.u8(n.velocity ? 1 : 0);
    if (n.velocity) w.u8(static_cast<std::uint8_t>(*n.velocity));
    w.u8(n.grace ? 1 : 0);
    w.u8(n.tie_to_next ? 1 : 0);
    w.u32(static_cast<std::uint32_t>(n.measure_index));
}

inline NoteEvent read_note(ReaderB& r) {
    NoteEvent n;
    n.onset = r.rational();
    n.duration = r.rational();
    n.midi_pitch = r.u8();
    if (r.u8()) {
        SpelledPitch sp;
        sp.step = static_cast<char>(r.u8());
        sp.alter = static_cast<std::int8_t>(r.u8());
        sp.octave = static_cast<std::int8_t>(r.u8());
        n.spelled_pitch = sp;
    }
    if (r.u8()) n.velocity = r.u8();
    n.grace = r.u8() != 0;
    n.tie_to_next = r.u8() != 0;
    n.measure_index = static_cast<int>(r.u32());
    return n;
}

// Payload: magic, format version, created_at, score header, then
// length-prefixed sections (parts, measures, signatures, events,
// annotations). Length prefixes make truncation detectable.
inline std::string serialize(const Score& score, const std::vector<HarmonicAnnotation>& annotations,
                             std::uint64_t created_at) {
    Writer w;
    w.raw(kMagic, 4);
    w.u16(kFormatVersion);
    w.u64(created_at);
    w.u8(static_cast<std::uint8_t>(score.source_format));
    w.str(score.parser_version);
    w.str(score.source_path);

    auto section = [&](auto&& fill) {
        Writer body;
        fill(body);
        w.u64(body.buf.size());
        w.buf += body.buf;
    };

    section([&](Writer& b) {
        b.u32(static_cast<std::uint32_t>(score.parts.size()));
        for (const auto& part : score.parts) {
            b.u32(static_cast<std::uint32_t>(part.index));
            b.str(part.name);
            b.u8(part.midi_program ? 1 : 0);
            if (part.midi_program) b.u8(static_cast<std::uint8_t>(*part.midi_program));
            b.u8(part.percussion ? 1 : 0);
            b.u32(static_cast<std::uint32_t>(part.notes.size()));
            for (const auto& n : part.notes) write_note(b, n);
            b.u32(static_cast<std::uint32_t>(part.lyrics.size()));
            for (const auto& lyric : part.lyrics) {
                b.rational(lyric.onset);
                b.str(lyric.syllable);
            }
        }
    });
    section([&](Writer& b) {
        b.u32(static_cast<std::uint32_t>(score.measure_map.size()));
        for (const auto& m : score.measure_map) {
            b.u32(static_cast<std::uint32_t>(m.index));
            b.rational(m.start);
            b.u32(static_cast<std::uint32_t>(m.ts_num));
            b.u32(static_cast<std::uint32_t>(m.ts_den));
        }
    });
    section([&](Writer& b) {
        b.u32(static_cast<std::uint32_t>(score.key_signatures.size()));
        for (const auto& k : score.key_signatures) {
            b.rational(k.onset);
            b.i64(k.fifths);
            b.u8(k.minor ? 1 : 0);
            if (k.minor) b.u8(*k.minor ? 1 : 0);
        }
        b.u32(static_cast<std::uint32_t>(score.tempo_events.size()));
        for (const auto& t : score.tempo_events) {
            b.rational(t.onset);
            b.f64(t.bpm);
            b.u8(static_cast<std::uint8_t>(t.source));
        }
        b.u32(static_cast<std::uint32_t>(score.dynamic_events.size()));
        for (const auto& d : score.dynamic_events) {
            b.rational(d.onset);
            b.u32(static_cast<std::uint32_t>(d.part_index));
            b.u8(static_cast<std::uint8_t>(d.mark));
        }
    });
    section([&](Writer& b) {
        b.u32(static_cast<std::uint32_t>(annotations.size()));
        for (const auto& a : annotations) {
            b.u32(static_cast<std::uint32_t>(a.measure_index));
            b.f64(a.beat);
            b.str(a.label);
            b.str(a.local_key);
        }
    });
    return w.buf;
}

inline ParsedScore deserialize(std::string_view payload) {
    ReaderB r{payload};
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw CorruptEntry{};
    if (r.u16() != kFormatVersion) throw CorruptEntry{};
    r.u64(); // created_at

    ParsedScore out;
    std::uint8_t fmt = r.u8();
    if (fmt > 2) throw CorruptEntry{};
    out.score.source_format = static_cast<SourceFormat>(fmt);
    out.score.parser_version = r.str();
    out.score.source_path = r.str();

    auto begin_section = [&]() {
        std::uint64_t len = r.u64();
        r.need(len);
        return r.pos + len;
    };

    std::size_t end = begin_section();
    std::uint32_t part_count = r.u32();
    if (part_count > (1u << 20)) throw CorruptEntry{};
    for (std::uint32_t p = 0; p < part_count; ++p) {
        Part part;
        part.index = static_cast<int>(r.u32());
        part.name = r.str();
        if (r.u8()) part.midi_program = r.u8();
        part.percussion = r.u8() != 0;
        std::uint32_t note_count = r.u32();
        if (note_count > (1u << 26)) throw CorruptEntry{};
        part.notes.reserve(note_count);
        for (std::uint32_t i = 0; i < note_count; ++i) part.notes.push_back(read_note(r));
        std::uint32_t lyric_count = r.u32();
        if (lyric_count > (1u << 26)) throw CorruptEntry{};
        for (std::uint32_t i = 0; i < lyric_count; ++i) {
            Lyric lyric;
            lyric.onset = r.rational();
            lyric.syllable = r.str();
            part.lyrics.push_back(std::move(lyric));
        }
        out.score.parts.push_back(std::move(part));
    }
    if (r.pos != end) throw CorruptEntry{};

    end = begin_section();
    std::uint32_t measure_count = r.u32();
    if (measure_count > (1u << 26)) throw CorruptEntry{};
    for (std::uint32_t i = 0; i < measure_count; ++i) {
        Measure m;
        m.index = static_cast<int>(r.u32());
        m.start = r.rational();
        m.ts_num = static_cast<int>(r.u32());
        m.ts_den = static_cast<int>(r.u32());
        out.score.measure_map.push_back(m);
    }
    if (r.pos != end) throw CorruptEntry{};

    end = begin_section();
    std::uint32_t key_count = r.u32();
    if (key_count > (1u << 26)) throw CorruptEntry{};
    for (std::uint32_t i = 0; i < key_count; ++i) {
        KeySignatureEvent k;
        k.onset = r.rational();
        k.fifths = static_cast<int>(r.i64());
        if (r.u8()) k.minor = r.u8() != 0;
        out.score.key_signatures.push_back(k);
    }
    std::uint32_t tempo_count = r.u32();
    if (tempo_count > (1u << 26)) throw CorruptEntry{};
    for (std::uint32_t i = 0; i < tempo_count; ++i) {
        TempoEvent t;
        t.onset = r.rational();
        t.bpm = r.f64();
        std::uint8_t src = r.u8();
        if (src > 2) throw CorruptEntry{};
        t.source = static_cast<TempoSource>(src);
        out.score.tempo_events.push_back(t);
    }
    std::uint32_t dyn_count = r.u32();
    if (dyn_count > (1u << 26)) throw CorruptEntry{};
    for (std::uint32_t i = 0; i < dyn_count; ++i) {
        DynamicEvent d;
        d.onset = r.rational();
        d.part_index = static_cast<int>(r.u32());
        std::uint8_t mark = r.u8();
        if (mark < 1 || mark > 8) throw CorruptEntry{};
        d.mark = static_cast<DynamicMark>(mark);
        out.score.dynamic_events.push_back(d);
    }
    if (r.pos != end) throw CorruptEntry{};

    end = begin_section();
    std::uint32_t ann_count = r.u32();
    if (ann_count > (1u << 26)) throw CorruptEntry{};
    for (std::uint32_t i = 0; i < ann_count; ++i) {
        HarmonicAnnotation a;
        a.measure_index = static_cast<int>(r.u32());
        a.beat = r.f64();
        a.label = r.str();
        a.local_key = r.str();
        out.annotations.push_back(std::move(a));
    }
    if (r.pos != end || r.pos != payload.size()) throw CorruptEntry{};
    return out;
}

inline std::atomic<std::uint64_t>& temp_counter() {
    static std::atomic<std::uint64_t> n{0};
    return n;
}

} // namespace cache_detail

// Entries live at <dir>/<first 2 hex chars>/<digest>-<parser_version>.nfsc.
inline std::filesystem::path cache_entry_path(const std::filesystem::path& dir, const CacheKey& key) {
    return dir / key.content_hash.substr(0, 2) / (key.content_hash + "-" + key.parser_version + ".nfsc");
}

// Durable, atomic write (temp file + rename). Returns false on I/O failure;
// extraction proceeds uncached in that case.
inline bool cache_put(const std::filesystem::path& dir, const CacheKey& key, const Score& score,
                      const std::vector<HarmonicAnnotation>& annotations = {}) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::path target = cache_entry_path(dir, key);
    fs::create_directories(target.parent_path(), ec);
    if (ec) return false;

    auto now = static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch()).count());
    std::string payload = cache_detail::serialize(score, annotations, now);

    fs::path tmp = target.parent_path() /
                   (".tmp-" + key.content_hash.substr(0, 16) + "-" +
                    std::to_string(cache_detail::temp_counter().fetch_add(1)) + "-" +
                    std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) return false;
        out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
        if (!out) { out.close(); fs::remove(tmp, ec); return false; }
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        return false;
    }
    return true;
}

// Hit returns the deserialized score (plus embedded annotations); corruption
// and version drift degrade to a miss and remove the entry.
inline std::optional<ParsedScore> cache_get(const std::filesystem::path& dir, const CacheKey& key) {
    namespace fs = std::filesystem;
    fs::path target = cache_entry_path(dir, key);
    std::ifstream in(target, std::ios::binary);
    if (!in) return std::nullopt;
    std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();

    try {
        ParsedScore parsed = cache_detail::deserialize(payload);
        if (parsed.score.parser_version != key.parser_version ||
            parsed.score.source_format != key.format)
            throw cache_detail::CorruptEntry{};
        return parsed;
    } catch (const cache_detail::CorruptEntry&) {
        std::error_code ec;
        fs::remove(target, ec);
        return std::nullopt;
    }
}

// Removes every cache entry under dir. Returns the number of entries removed.
inline std::size_t cache_clear(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    std::size_t removed = 0;
    if (!fs::exists(dir, ec)) return 0;
    for (const auto& sub : fs::directory_iterator(dir, ec)) {
        if (!sub.is_directory()) continue;
        for (const auto& entry : fs::directory_iterator(sub.path(), ec)) {
            if (entry.path().extension() == ".nfsc" && entry.is_regular_file()) {
                if (fs::remove(entry.path(), ec)) ++removed;
            }
        }
        fs::remove(sub.path(), ec); // succeeds only when empty
    }
    return removed;
}

} // namespace notefeat
