#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "io.hpp"

namespace ngram {

// Per-order array of distinct payload values, most frequently referenced
// first (ties by value) so that the per-gram indexes are small and skewed.
struct unique_value_array {
    static unique_value_array build(const std::vector<uint64_t>& values,
                                    std::vector<uint64_t>* indexes = nullptr) {
        std::unordered_map<uint64_t, uint64_t> freq;
        for (uint64_t v : values) ++freq[v];
        unique_value_array a;
        a.m_values.reserve(freq.size());
        for (const auto& [v, _] : freq) a.m_values.push_back(v);
        std::sort(a.m_values.begin(), a.m_values.end(), [&](uint64_t x, uint64_t y) {
            if (freq[x] != freq[y]) return freq[x] > freq[y];
            return x < y;
        });
        if (indexes) {
            std::unordered_map<uint64_t, uint64_t> pos;
            for (uint64_t i = 0; i < a.m_values.size(); ++i) pos[a.m_values[i]] = i;
            indexes->resize(values.size());
            for (uint64_t i = 0; i < values.size(); ++i) (*indexes)[i] = pos[values[i]];
        }
        return a;
    }

    uint64_t value(uint64_t index) const {
        check(index < m_values.size(), "unique_value_array: index out of range");
        return m_values[index];
    }

    uint64_t size() const { return m_values.size(); }

    void save(std::ostream& out) const { write_vec(out, m_values); }
    void load(std::istream& in) { m_values = read_vec<uint64_t>(in); }

    std::vector<uint64_t> m_values;
};

}  // namespace ngram
