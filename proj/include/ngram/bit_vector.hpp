#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

#include "common.hpp"
#include "io.hpp"

namespace ngram {

struct bit_vector_builder {
    bit_vector_builder() : m_size(0) {}

    explicit bit_vector_builder(uint64_t n) : m_size(n), m_words(words_for(n), 0) {}

    void push_back(bool b) {
        uint64_t pos = m_size++;
        if (m_words.size() * 64 < m_size) m_words.push_back(0);
        if (b) m_words[pos >> 6] |= uint64_t(1) << (pos & 63);
    }

    // appends the len low bits of v, least significant first
    void append_bits(uint64_t v, uint32_t len) {
        assert(len <= 64);
        if (len == 0) return;
        assert(len == 64 || (v >> len) == 0);
        uint64_t pos = m_size;
        m_size += len;
        if (m_words.size() * 64 < m_size) m_words.resize(words_for(m_size), 0);
        uint64_t word = pos >> 6, shift = pos & 63;
        m_words[word] |= v << shift;
        if (shift && shift + len > 64) m_words[word + 1] |= v >> (64 - shift);
    }

    void set(uint64_t pos) {
        assert(pos < m_size);
        m_words[pos >> 6] |= uint64_t(1) << (pos & 63);
    }

    uint64_t size() const { return m_size; }

    static uint64_t words_for(uint64_t bits) { return (bits + 63) / 64; }

    uint64_t m_size;
    std::vector<uint64_t> m_words;
};

struct bit_vector {
    bit_vector() : m_size(0) {}

    explicit bit_vector(bit_vector_builder&& b)
        : m_size(b.m_size), m_words(std::move(b.m_words)) {}

    bool get(uint64_t pos) const {
        assert(pos < m_size);
        return (m_words[pos >> 6] >> (pos & 63)) & 1;
    }

    // reads len <= 64 bits starting at pos, least significant first
    uint64_t get_bits(uint64_t pos, uint32_t len) const {
        assert(pos + len <= m_size);
        if (len == 0) return 0;
        uint64_t word = pos >> 6, shift = pos & 63;
        uint64_t v = m_words[word] >> shift;
        if (shift + len > 64) v |= m_words[word + 1] << (64 - shift);
        return len == 64 ? v : v & ((uint64_t(1) << len) - 1);
    }

    // position of the first set bit at or after pos; m_size if none
    uint64_t successor1(uint64_t pos) const {
        if (pos >= m_size) return m_size;
        uint64_t word = pos >> 6;
        uint64_t w = m_words[word] >> (pos & 63);
        if (w) return pos + std::countr_zero(w);
        for (++word; word < m_words.size(); ++word)
            if (m_words[word]) return word * 64 + std::countr_zero(m_words[word]);
        return m_size;
    }

    uint64_t num_ones() const {
        uint64_t n = 0;
        for (uint64_t w : m_words) n += std::popcount(w);
        return n;
    }

    uint64_t size() const { return m_size; }
    uint64_t bits() const { return m_words.size() * 64; }

    void save(std::ostream& out) const {
        write_pod<uint64_t>(out, m_size);
        write_vec(out, m_words);
    }

    void load(std::istream& in) {
        m_size = read_pod<uint64_t>(in);
        m_words = read_vec<uint64_t>(in);
    }

    uint64_t m_size;
    std::vector<uint64_t> m_words;
};

// Select support over set bits: one sampled position every 1024 ones, queries
// finish the job with a per-word popcount scan from the preceding sample.
struct select1_index {
    static constexpr uint64_t sample_rate = 1024;

    select1_index() : m_ones(0) {}

    void build(const bit_vector& bv) {
        m_samples.clear();
        m_ones = 0;
        for (uint64_t word = 0; word < bv.m_words.size(); ++word) {
            uint64_t w = bv.m_words[word];
            while (w) {
                if (m_ones % sample_rate == 0)
                    m_samples.push_back(word * 64 + std::countr_zero(w));
                ++m_ones;
                w &= w - 1;
            }
        }
    }

    // position of the k-th (0-based) set bit
    uint64_t select(const bit_vector& bv, uint64_t k) const {
        assert(k < m_ones);
        uint64_t pos = m_samples[k / sample_rate];
        uint64_t rank = k - k % sample_rate;
        uint64_t word = pos >> 6;
        uint64_t w = bv.m_words[word] >> (pos & 63) << (pos & 63);
        while (true) {
            uint64_t c = std::popcount(w);
            if (rank + c > k) break;
            rank += c;
            w = bv.m_words[++word];
        }
        while (rank < k) {
            w &= w - 1;
            ++rank;
        }
        return word * 64 + std::countr_zero(w);
    }

    uint64_t num_ones() const { return m_ones; }

    void save(std::ostream& out) const {
        write_pod<uint64_t>(out, m_ones);
        write_vec(out, m_samples);
    }

    void load(std::istream& in) {
        m_ones = read_pod<uint64_t>(in);
        m_samples = read_vec<uint64_t>(in);
    }

    uint64_t m_ones;
    std::vector<uint64_t> m_samples;
};

}  // namespace ngram
