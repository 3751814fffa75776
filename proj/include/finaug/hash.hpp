#pragma once

#include <cstdint>
#include <string_view>

namespace finaug {

// FNV-1a 64-bit hash.  Used to key named noise substreams and to fingerprint
// canonicalized configuration text in run outputs.
constexpr std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace finaug
