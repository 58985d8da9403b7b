#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "common.hpp"
#include "io.hpp"

namespace ngram {

// Binning quantization: sort the values, split them into 2^q equally sized
// bins (the last may be smaller), and represent each bin by the mean of its
// members. The codebook is nondecreasing by construction. Elements are
// assigned by their rank in a stable sort, so the mapping is deterministic.
struct binning_quantizer {
    static constexpr uint8_t min_bits = 2;
    static constexpr uint8_t max_bits = 32;

    binning_quantizer() : m_bits(0) {}

    static binning_quantizer train(const std::vector<float>& values, uint8_t q,
                                   std::vector<uint32_t>* assignment = nullptr) {
        check(q >= min_bits && q <= max_bits, "quantizer: q out of range");
        binning_quantizer z;
        z.m_bits = q;
        uint64_t n = values.size();
        if (n == 0) return z;
        std::vector<uint64_t> rank(n);
        std::iota(rank.begin(), rank.end(), 0);
        std::stable_sort(rank.begin(), rank.end(),
                         [&](uint64_t a, uint64_t b) { return values[a] < values[b]; });
        uint64_t bins = q >= 63 ? n : std::min<uint64_t>(uint64_t(1) << q, n);
        uint64_t bin_size = (n + bins - 1) / bins;
        uint64_t num_bins = (n + bin_size - 1) / bin_size;
        z.m_codebook.resize(num_bins);
        if (assignment) assignment->assign(n, 0);
        for (uint64_t b = 0; b < num_bins; ++b) {
            uint64_t lo = b * bin_size, hi = std::min(n, lo + bin_size);
            double sum = 0;
            for (uint64_t i = lo; i < hi; ++i) {
                sum += values[rank[i]];
                if (assignment) (*assignment)[rank[i]] = static_cast<uint32_t>(b);
            }
            z.m_codebook[b] = static_cast<float>(sum / double(hi - lo));
        }
        return z;
    }

    float value(uint32_t index) const {
        check(index < m_codebook.size(), "quantizer: index out of range");
        return m_codebook[index];
    }

    uint8_t bits() const { return m_bits; }
    uint64_t codebook_size() const { return m_codebook.size(); }

    void save(std::ostream& out) const {
        write_pod<uint8_t>(out, m_bits);
        write_vec(out, m_codebook);
    }

    void load(std::istream& in) {
        m_bits = read_pod<uint8_t>(in);
        m_codebook = read_vec<float>(in);
    }

    uint8_t m_bits;
    std::vector<float> m_codebook;
};

}  // namespace ngram
