#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

namespace notefeat {

struct ZipError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Read-only ZIP archive view, enough to unpack .mxl containers: central
// directory lookup plus stored/deflate entries. No zip64, no encryption.
class ZipReader {
public:
    explicit ZipReader(std::string_view bytes) : bytes_(bytes) { read_central_directory(); }

    static bool looks_like_zip(std::string_view bytes) {
        return bytes.size() >= 4 && bytes.substr(0, 2) == "PK";
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& [name, e] : entries_) out.push_back(name);
        return out;
    }

    bool contains(const std::string& name) const { return entries_.count(name) != 0; }

    std::string read(const std::string& name) const {
        auto it = entries_.find(name);
        if (it == entries_.end()) throw ZipError("zip: no such entry: " + name);
        const Entry& e = it->second;

        if (e.local_offset + 30 > bytes_.size() || bytes_.substr(e.local_offset, 4) != "PK\x03\x04")
            throw ZipError("zip: bad local header");
        std::uint16_t name_len = u16(e.local_offset + 26);
        std::uint16_t extra_len = u16(e.local_offset + 28);
        std::size_t data_off = e.local_offset + 30 + name_len + extra_len;
        if (data_off + e.compressed_size > bytes_.size()) throw ZipError("zip: truncated entry data");
        std::string_view data = bytes_.substr(data_off, e.compressed_size);

        if (e.method == 0) {
            if (e.compressed_size != e.uncompressed_size) throw ZipError("zip: stored size mismatch");
            return std::string(data);
        }
        if (e.method == 8) return inflate_raw(data, e.uncompressed_size);
        throw ZipError("zip: unsupported compression method " + std::to_string(e.method));
    }

private:
    struct Entry {
        std::uint16_t method = 0;
        std::uint32_t compressed_size = 0;
        std::uint32_t uncompressed_size = 0;
        std::size_t local_offset = 0;
    };

    std::uint16_t u16(std::size_t off) const {
        return static_cast<std::uint16_t>(static_cast<unsigned char>(bytes_[off])) |
               (static_cast<std::uint16_t>(static_cast<unsigned char>(bytes_[off + 1])) << 8);
    }
    std::uint32_t u32(std::size_t off) const {
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes_[off + i]);
        return v;
    }

    void read_central_directory() {
        if (bytes_.size() < 22) throw ZipError("zip: too short");
        // find the end-of-central-directory record, scanning back over a comment
        std::size_t limit = bytes_.size() >= 22 + 65535 ? bytes_.size() - 22 - 65535 : 0;
        std::size_t eocd = std::string_view::npos;
        for (std::size_t i = bytes_.size() - 22; ; --i) {
            if (bytes_.substr(i, 4) == "PK\x05\x06") { eocd = i; break; }
            if (i == limit) break;
        }
        if (eocd == std::string_view::npos) throw ZipError("zip: end of central directory not found");

        std::uint16_t count = u16(eocd + 10);
        std::uint32_t cd_offset = u32(eocd + 16);
        std::size_t pos = cd_offset;
        for (std::uint16_t i = 0; i < count; ++i) {
            if (pos + 46 > bytes_.size() || bytes_.substr(pos, 4) != "PK\x01\x02")
                throw ZipError("zip: bad central directory entry");
            Entry e;
            e.method = u16(pos + 10);
            e.compressed_size = u32(pos + 20);
            e.uncompressed_size = u32(pos + 24);
            std::uint16_t name_len = u16(pos + 28);
            std::uint16_t extra_len = u16(pos + 30);
            std::uint16_t comment_len = u16(pos + 32);
            e.local_offset = u32(pos + 42);
            if (pos + 46 + name_len > bytes_.size()) throw ZipError("zip: truncated entry name");
            std::string name(bytes_.substr(pos + 46, name_len));
            entries_[name] = e;
            pos += 46 + name_len + extra_len + comment_len;
        }
    }

    static std::string inflate_raw(std::string_view data, std::uint32_t expected_size) {
        if (expected_size > (1u << 30)) throw ZipError("zip: entry too large");
        std::string out(expected_size, '\0');
        z_stream zs;
        std::memset(&zs, 0, sizeof(zs));
        if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw ZipError("zip: inflateInit failed");
        zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
        zs.avail_in = static_cast<uInt>(data.size());
        zs.next_out = reinterpret_cast<Bytef*>(out.data());
        zs.avail_out = static_cast<uInt>(out.size());
        int rc = inflate(&zs, Z_FINISH);
        inflateEnd(&zs);
        if (rc != Z_STREAM_END || zs.total_out != expected_size)
            throw ZipError("zip: corrupt deflate stream");
        return out;
    }

    std::string_view bytes_;
    std::map<std::string, Entry> entries_;
};

} // namespace notefeat
