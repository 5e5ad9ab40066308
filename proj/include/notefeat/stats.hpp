#pragma once

#include <atomic>
#include <cstdint>

namespace notefeat {

// Counts raw-bytes parser invocations across the process. The cache tests
// use it to prove that warm runs never touch a parser.
inline std::atomic<std::uint64_t>& parser_invocations() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

// Dynamic marks outside the ppp..fff vocabulary (sfz, fp, ...) are skipped
// but tallied here.
inline std::atomic<std::uint64_t>& unknown_dynamic_marks() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

} // namespace notefeat
