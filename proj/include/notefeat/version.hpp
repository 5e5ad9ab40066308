#pragma once

namespace notefeat {

// Bumping this invalidates every cache entry; bump whenever parser output
// for any format can change.
inline constexpr const char* kParserVersion = "0.1.0";

} // namespace notefeat
