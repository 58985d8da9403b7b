#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bit_vector.hpp"
#include "common.hpp"
#include "elias_fano.hpp"
#include "io.hpp"

namespace ngram {

// Uniformly partitioned Elias-Fano: fixed-size blocks, each encoded with a
// universe relative to the block so that skewed value distributions pay only
// for their local spread. Per-block upper bounds are kept uncompressed
// (bit-aligned) so access needs no search: block = i / block_size.
struct partitioned_sequence {
    partitioned_sequence() : m_size(0), m_universe(0), m_block_size(0), m_ub_width(0) {}

    static partitioned_sequence encode(const std::vector<uint64_t>& values, uint64_t u,
                                       uint32_t block_size) {
        check(block_size > 0, "partitioned_sequence: block size must be positive");
        partitioned_sequence s;
        s.m_size = values.size();
        s.m_universe = u;
        s.m_block_size = block_size;
        s.m_ub_width = bits_for(u);
        uint64_t blocks = (s.m_size + block_size - 1) / block_size;
        bit_vector_builder ubs;
        uint64_t base = 0;
        for (uint64_t j = 0; j < blocks; ++j) {
            uint64_t lo = j * block_size;
            uint64_t hi = std::min<uint64_t>(lo + block_size, s.m_size);
            uint64_t ub = values[hi - 1];
            check(ub <= u, "partitioned_sequence: value exceeds universe");
            ubs.append_bits(ub, s.m_ub_width);
            std::vector<uint64_t> local(hi - lo);
            for (uint64_t i = lo; i < hi; ++i) {
                check(values[i] >= base && values[i] <= ub,
                      "partitioned_sequence: sequence not nondecreasing");
                local[i - lo] = values[i] - base;
            }
            s.m_blocks.push_back(elias_fano::encode(local, ub - base));
            base = ub;
        }
        s.m_upper_bounds = bit_vector(std::move(ubs));
        return s;
    }

    uint64_t access(uint64_t i) const {
        check(i < m_size, "partitioned_sequence: access out of bounds");
        uint64_t j = i / m_block_size;
        uint64_t base = j ? upper_bound(j - 1) : 0;
        return base + m_blocks[j].access(i - j * m_block_size);
    }

    // smallest position p in [b, e) with access(p) == x, if any
    std::optional<uint64_t> find(uint64_t b, uint64_t e, uint64_t x) const {
        check(b <= e && e <= m_size, "partitioned_sequence: bad find range");
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

    uint64_t upper_bound(uint64_t j) const {
        return m_upper_bounds.get_bits(j * m_ub_width, m_ub_width);
    }

    uint64_t size() const { return m_size; }
    uint64_t universe() const { return m_universe; }
    uint64_t num_blocks() const { return m_blocks.size(); }

    uint64_t payload_bits() const {
        uint64_t bits = m_upper_bounds.size();
        for (const auto& b : m_blocks) bits += b.payload_bits();
        return bits;
    }

    uint64_t serialized_bits() const {
        uint64_t bits = m_upper_bounds.size() + 8 * (8 + 8 + 4 + 8 + 1 + 1 + 6);
        for (const auto& b : m_blocks) bits += b.serialized_bits();
        return bits;
    }

    void save(std::ostream& out) const {
        write_magic(out, "EFSQ", 1);
        write_pod<uint64_t>(out, m_size);
        write_pod<uint64_t>(out, m_universe);
        write_pod<uint8_t>(out, 0);  // no global low width; blocks carry their own
        write_pod<uint32_t>(out, m_block_size);
        write_pod<uint64_t>(out, m_blocks.size());
        write_pod<uint8_t>(out, static_cast<uint8_t>(m_ub_width));
        m_upper_bounds.save(out);
        for (const auto& b : m_blocks) b.save(out);
    }

    void load(std::istream& in) {
        read_magic(in, "EFSQ");
        m_size = read_pod<uint64_t>(in);
        m_universe = read_pod<uint64_t>(in);
        read_pod<uint8_t>(in);
        m_block_size = read_pod<uint32_t>(in);
        uint64_t blocks = read_pod<uint64_t>(in);
        m_ub_width = read_pod<uint8_t>(in);
        m_upper_bounds.load(in);
        m_blocks.resize(blocks);
        for (auto& b : m_blocks) b.load(in);
    }

    uint64_t m_size;
    uint64_t m_universe;
    uint32_t m_block_size;
    uint32_t m_ub_width;
    bit_vector m_upper_bounds;
    std::vector<elias_fano> m_blocks;
};

}  // namespace ngram
