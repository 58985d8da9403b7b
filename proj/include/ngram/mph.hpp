#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "hashing.hpp"
#include "io.hpp"

namespace ngram {

// Minimal perfect hash over a static key set, built by peeling a random
// 3-uniform hypergraph (vertices split in three parts of ~1.23 n / 3 each,
// one vertex per part per key). A 2-bit value per vertex picks the edge's
// representative vertex; value 3 marks vertices that represent no key, so
// minimality comes from ranking the non-3 values. A failed peeling retries
// with a fresh seed. Costs ~2.6 bits per key including the rank samples.
struct minimal_perfect_hash {
    static constexpr double gamma = 1.23;
    static constexpr uint64_t words_per_sample = 8;  // rank sample every 256 vertices

    minimal_perfect_hash() : m_keys(0), m_part(0), m_seed(0) {}

    using key_fn = std::function<std::string_view(uint64_t)>;

    static minimal_perfect_hash build(uint64_t n, const key_fn& key, uint64_t base_seed = 1) {
        minimal_perfect_hash f;
        f.m_keys = n;
        f.m_part = std::max<uint64_t>(2, static_cast<uint64_t>(gamma * double(n) / 3.0) + 1);
        if (n == 0) return f;
        for (uint32_t attempt = 0; attempt < 64; ++attempt) {
            f.m_seed = base_seed + attempt * 0x9E3779B97F4A7C15ULL;
            if (f.try_build(key)) {
                f.build_rank();
                return f;
            }
        }
        throw error("minimal_perfect_hash: peeling failed (duplicate keys?)");
    }

    // slot in [0, n) for member keys; may return n or a colliding slot for
    // alien keys, which callers reject via fingerprints
    uint64_t operator()(std::string_view key) const {
        uint64_t v[3];
        vertices(key, v);
        uint64_t s = (g(v[0]) + g(v[1]) + g(v[2])) % 3;
        return rank(v[s]);
    }

    uint64_t num_keys() const { return m_keys; }

    uint64_t bits() const { return m_g.size() * 64 + m_rank_samples.size() * 64 + 8 * 24; }

    void save(std::ostream& out) const {
        write_pod<uint64_t>(out, m_keys);
        write_pod<uint64_t>(out, m_part);
        write_pod<uint64_t>(out, m_seed);
        write_vec(out, m_g);
        write_vec(out, m_rank_samples);
    }

    void load(std::istream& in) {
        m_keys = read_pod<uint64_t>(in);
        m_part = read_pod<uint64_t>(in);
        m_seed = read_pod<uint64_t>(in);
        m_g = read_vec<uint64_t>(in);
        m_rank_samples = read_vec<uint64_t>(in);
    }

    void vertices(std::string_view key, uint64_t v[3]) const {
        uint64_t a = murmur64(key, m_seed);
        uint64_t b = murmur64(key, m_seed ^ 0xA5A5A5A5A5A5A5A5ULL);
        uint64_t c = a ^ (b << 32 | b >> 32) ^ 0x6b43a9b5ULL;
        v[0] = a % m_part;
        v[1] = m_part + b % m_part;
        v[2] = 2 * m_part + c % m_part;
    }

    uint64_t g(uint64_t v) const { return (m_g[v >> 5] >> ((v & 31) * 2)) & 3; }

  private:
    bool try_build(const key_fn& key) {
        uint64_t n = m_keys, verts = 3 * m_part;
        std::vector<std::array<uint64_t, 3>> edges(n);
        std::vector<uint32_t> deg(verts, 0);
        std::vector<uint64_t> exor(verts, 0);  // xor of incident edge ids
        for (uint64_t e = 0; e < n; ++e) {
            vertices(key(e), edges[e].data());
            for (int j = 0; j < 3; ++j) {
                ++deg[edges[e][j]];
                exor[edges[e][j]] ^= e;
            }
        }
        // peel: repeatedly detach an edge at a degree-1 vertex
        std::vector<std::pair<uint64_t, uint64_t>> order;  // (edge, free vertex)
        order.reserve(n);
        std::vector<uint64_t> queue;
        for (uint64_t v = 0; v < verts; ++v)
            if (deg[v] == 1) queue.push_back(v);
        while (!queue.empty()) {
            uint64_t v = queue.back();
            queue.pop_back();
            if (deg[v] != 1) continue;
            uint64_t e = exor[v];
            order.push_back({e, v});
            for (int j = 0; j < 3; ++j) {
                uint64_t u = edges[e][j];
                --deg[u];
                exor[u] ^= e;
                if (deg[u] == 1) queue.push_back(u);
            }
        }
        if (order.size() != n) return false;
        // assign in reverse peel order: the free vertex is still unassigned
        // when its edge is processed; value 3 (the init) reads as 0 mod 3
        m_g.assign((verts + 31) / 32, ~uint64_t(0));
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            auto [e, free] = *it;
            uint64_t j = 0, s = 0;
            for (int i = 0; i < 3; ++i) {
                if (edges[e][i] == free)
                    j = i;
                else
                    s += g(edges[e][i]);
            }
            set_g(free, (j + 3 - s % 3) % 3);
        }
        return true;
    }

    void set_g(uint64_t v, uint64_t val) {
        uint64_t shift = (v & 31) * 2;
        m_g[v >> 5] = (m_g[v >> 5] & ~(uint64_t(3) << shift)) | (val << shift);
    }

    static uint64_t word_assigned(uint64_t w) {
        // number of 2-bit fields in w not equal to 3
        return 32 - std::popcount((w >> 1) & w & 0x5555555555555555ULL);
    }

    void build_rank() {
        m_rank_samples.clear();
        uint64_t acc = 0;
        for (uint64_t w = 0; w < m_g.size(); ++w) {
            if (w % words_per_sample == 0) m_rank_samples.push_back(acc);
            acc += word_assigned(m_g[w]);
        }
    }

    // number of assigned (non-3) vertices before v
    uint64_t rank(uint64_t v) const {
        uint64_t word = v >> 5;
        uint64_t r = m_rank_samples[word / words_per_sample];
        for (uint64_t w = word - word % words_per_sample; w < word; ++w)
            r += word_assigned(m_g[w]);
        uint64_t shift = (v & 31) * 2;
        // force fields at or above v to 3 so only lower fields count
        uint64_t masked = shift ? (m_g[word] | ~((uint64_t(1) << shift) - 1)) : ~uint64_t(0);
        return r + word_assigned(masked);
    }

    uint64_t m_keys;
    uint64_t m_part;
    uint64_t m_seed;
    std::vector<uint64_t> m_g;
    std::vector<uint64_t> m_rank_samples;
};

}  // namespace ngram
