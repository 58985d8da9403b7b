#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "bit_vector.hpp"
#include "common.hpp"
#include "io.hpp"

namespace ngram {

// Variable-length codewords for unbounded non-negative indexes: index i maps
// to the length-l codeword c = i + 2 - 2^l with l = floor(log2(i + 2)), so
// small (frequent) indexes get short codes. Codewords are concatenated in a
// bitvector B; a second bitvector L marks codeword boundaries via select1.
inline std::pair<uint64_t, uint32_t> codeword_encode(uint64_t i) {
    uint32_t l = msb(i + 2);
    return {i + 2 - (uint64_t(1) << l), l};
}

inline uint64_t codeword_decode(uint64_t c, uint32_t l) {
    return c + (uint64_t(1) << l) - 2;
}

struct codeword_array {
    codeword_array() : m_size(0) {}

    static codeword_array build(const std::vector<uint64_t>& indexes) {
        codeword_array a;
        a.m_size = indexes.size();
        bit_vector_builder codes;
        bit_vector_builder bounds;
        for (uint64_t i : indexes) {
            auto [c, l] = codeword_encode(i);
            bounds.push_back(true);
            for (uint32_t j = 1; j < l; ++j) bounds.push_back(false);
            codes.append_bits(c, l);
        }
        bounds.push_back(true);  // terminator so the last codeword has an end marker
        a.m_codes = bit_vector(std::move(codes));
        a.m_bounds = bit_vector(std::move(bounds));
        a.m_select.build(a.m_bounds);
        return a;
    }

    uint64_t access(uint64_t pos) const {
        check(pos < m_size, "codeword_array: access out of bounds");
        uint64_t b = m_select.select(m_bounds, pos);
        uint64_t e = m_bounds.successor1(b + 1);
        uint32_t l = static_cast<uint32_t>(e - b);
        return codeword_decode(m_codes.get_bits(b, l), l);
    }

    uint64_t size() const { return m_size; }
    uint64_t payload_bits() const { return m_codes.size() + m_bounds.size(); }
    uint64_t serialized_bits() const {
        return payload_bits() + m_select.m_samples.size() * 64 + 8 * (8 + 6);
    }

    void save(std::ostream& out) const {
        write_pod<uint64_t>(out, m_size);
        m_codes.save(out);
        m_bounds.save(out);
        m_select.save(out);
    }

    void load(std::istream& in) {
        m_size = read_pod<uint64_t>(in);
        m_codes.load(in);
        m_bounds.load(in);
        m_select.load(in);
    }

    uint64_t m_size;
    bit_vector m_codes;
    bit_vector m_bounds;
    select1_index m_select;
};

}  // namespace ngram
