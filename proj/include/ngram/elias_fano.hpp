#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bit_vector.hpp"
#include "common.hpp"
#include "io.hpp"

namespace ngram {

// Elias-Fano encoding of a nondecreasing sequence of m values in [0, u].
// Each value is split into low bits (stored verbatim) and high bits (stored
// as a unary-gap bitvector addressed by select1).
struct elias_fano {
    elias_fano() : m_size(0), m_universe(0), m_low_width(0) {}

    template <typename Iterator>
    static elias_fano encode(Iterator begin, uint64_t m, uint64_t u) {
        elias_fano ef;
        ef.m_size = m;
        ef.m_universe = u;
        ef.m_low_width = (m && u / m) ? msb(u / m) : 0;
        uint32_t l = ef.m_low_width;
        bit_vector_builder high(m ? m + (u >> l) + 1 : 1);
        bit_vector_builder low;
        uint64_t last = 0;
        Iterator it = begin;
        for (uint64_t i = 0; i < m; ++i, ++it) {
            uint64_t v = *it;
            check(v <= u, "elias_fano: value exceeds universe");
            check(i == 0 || v >= last, "elias_fano: sequence not nondecreasing");
            last = v;
            if (l) low.append_bits(v & ((uint64_t(1) << l) - 1), l);
            high.set((v >> l) + i);
        }
        ef.m_high = bit_vector(std::move(high));
        ef.m_low = bit_vector(std::move(low));
        ef.m_select.build(ef.m_high);
        return ef;
    }

    static elias_fano encode(const std::vector<uint64_t>& values, uint64_t u) {
        return encode(values.begin(), values.size(), u);
    }

    uint64_t access(uint64_t i) const {
        check(i < m_size, "elias_fano: access out of bounds");
        uint64_t high = m_select.select(m_high, i) - i;
        uint64_t low = m_low_width ? m_low.get_bits(i * m_low_width, m_low_width) : 0;
        return (high << m_low_width) | low;
    }

    // smallest position p in [b, e) with access(p) == x, if any
    std::optional<uint64_t> find(uint64_t b, uint64_t e, uint64_t x) const {
        check(b <= e && e <= m_size, "elias_fano: bad find range");
        uint64_t lo = b, hi = e;
        while (lo < hi) {
            uint64_t mid = lo + (hi - lo) / 2;
            if (access(mid) < x)
                lo = mid + 1;
            else
                hi = mid;
        }
        if (lo < e && access(lo) == x) return lo;
        return std::nullopt;
    }

    uint64_t size() const { return m_size; }
    uint64_t universe() const { return m_universe; }

    // low + high bitvector payload, excluding the select index
    uint64_t payload_bits() const { return m_low.size() + m_high.size(); }

    uint64_t serialized_bits() const {
        return payload_bits() + m_select.m_samples.size() * 64 + 8 * (8 + 8 + 1 + 6);
    }

    void save(std::ostream& out) const {
        write_magic(out, "EFSQ", 1);
        write_pod<uint64_t>(out, m_size);
        write_pod<uint64_t>(out, m_universe);
        write_pod<uint8_t>(out, static_cast<uint8_t>(m_low_width));
        m_low.save(out);
        m_high.save(out);
        m_select.save(out);
    }

    void load(std::istream& in) {
        read_magic(in, "EFSQ");
        m_size = read_pod<uint64_t>(in);
        m_universe = read_pod<uint64_t>(in);
        m_low_width = read_pod<uint8_t>(in);
        m_low.load(in);
        m_high.load(in);
        m_select.load(in);
    }

    uint64_t m_size;
    uint64_t m_universe;
    uint32_t m_low_width;
    bit_vector m_low;
    bit_vector m_high;
    select1_index m_select;
};

}  // namespace ngram
