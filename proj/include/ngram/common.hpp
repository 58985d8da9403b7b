#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ngram {

constexpr uint8_t max_order = 8;

inline uint32_t msb(uint64_t x) {
    // position of the most significant set bit; undefined for x == 0
    return 63 - std::countl_zero(x);
}

inline uint32_t bits_for(uint64_t x) {
    // width needed to store values in [0, x]
    return x ? msb(x) + 1 : 1;
}

inline uint32_t ceil_log2(uint64_t x) {
    if (x <= 1) return 0;
    return msb(x - 1) + 1;
}

struct error : std::runtime_error {
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

inline void check(bool cond, const std::string& what) {
    if (!cond) throw error(what);
}

}  // namespace ngram
