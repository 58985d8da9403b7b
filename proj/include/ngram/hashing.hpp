#pragma once

#include <cstdint>
#include <cstring>
#include <string_view>

namespace ngram {

// MurmurHash2 64A, seeded.
inline uint64_t murmur64(const void* key, size_t len, uint64_t seed) {
    const uint64_t m = 0xc6a4a7935bd1e995ULL;
    const int r = 47;
    uint64_t h = seed ^ (len * m);
    const unsigned char* data = static_cast<const unsigned char*>(key);
    const unsigned char* end = data + (len & ~size_t(7));
    while (data != end) {
        uint64_t k;
        std::memcpy(&k, data, 8);
        data += 8;
        k *= m;
        k ^= k >> r;
        k *= m;
        h ^= k;
        h *= m;
    }
    switch (len & 7) {
        case 7: h ^= uint64_t(data[6]) << 48; [[fallthrough]];
        case 6: h ^= uint64_t(data[5]) << 40; [[fallthrough]];
        case 5: h ^= uint64_t(data[4]) << 32; [[fallthrough]];
        case 4: h ^= uint64_t(data[3]) << 24; [[fallthrough]];
        case 3: h ^= uint64_t(data[2]) << 16; [[fallthrough]];
        case 2: h ^= uint64_t(data[1]) << 8; [[fallthrough]];
        case 1: h ^= uint64_t(data[0]); h *= m;
    }
    h ^= h >> r;
    h *= m;
    h ^= h >> r;
    return h;
}

inline uint64_t murmur64(std::string_view s, uint64_t seed) {
    return murmur64(s.data(), s.size(), seed);
}

}  // namespace ngram
