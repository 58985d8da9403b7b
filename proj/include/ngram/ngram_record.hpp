#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <vector>

#include "common.hpp"

namespace ngram {

// A fixed-capacity n-gram with an occurrence count. words[0..order-1] hold
// w_1..w_n in text order; slots past the order are kept zero so whole-record
// comparisons and hashing can ignore the order.
struct ngram_record {
    std::array<uint32_t, max_order> words{};
    uint64_t count = 0;

    bool same_words(const ngram_record& o, uint8_t order) const {
        return std::memcmp(words.data(), o.words.data(), order * sizeof(uint32_t)) == 0;
    }
};

// Key column order for the two sorts: suffix order reads the gram right to
// left (last word primary); context order reads the context right to left
// first and breaks ties by the last word (penultimate word primary).
inline uint32_t order_key_column(uint8_t order, uint32_t k, bool context) {
    if (context) return k + 1 < order ? order - 2 - k : order - 1;
    return order - 1 - k;
}

struct suffix_order_less {
    uint8_t order;
    bool operator()(const ngram_record& a, const ngram_record& b) const {
        for (uint32_t k = 0; k < order; ++k) {
            uint32_t c = order_key_column(order, k, false);
            if (a.words[c] != b.words[c]) return a.words[c] < b.words[c];
        }
        return false;
    }
};

struct context_order_less {
    uint8_t order;
    bool operator()(const ngram_record& a, const ngram_record& b) const {
        for (uint32_t k = 0; k < order; ++k) {
            uint32_t c = order_key_column(order, k, true);
            if (a.words[c] != b.words[c]) return a.words[c] < b.words[c];
        }
        return false;
    }
};

}  // namespace ngram
