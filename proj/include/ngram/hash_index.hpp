#pragma once

#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "hashing.hpp"
#include "io.hpp"
#include "mph.hpp"
#include "unique_values.hpp"
#include "vocabulary.hpp"

namespace ngram {

// Hash-based n-gram index: one minimal perfect hash table per order, each
// slot holding a 64-bit key fingerprint and a byte-aligned index into the
// order's distinct-value array. Tables are exactly as large as the number of
// grams of that order; misses are detected by fingerprint mismatch.
struct hash_index {
    static constexpr uint64_t fingerprint_seed = 0x9E3779B97F4A7C15ull;

    using gram_list = std::vector<std::pair<std::vector<uint32_t>, uint64_t>>;

    struct order_table {
        uint64_t entries = 0;
        minimal_perfect_hash mph;
        std::vector<uint64_t> fingerprints;
        uint8_t index_width = 1;
        std::vector<uint8_t> payload_indexes;  // entries * index_width bytes
        unique_value_array values;

        void save(std::ostream& out) const {
            write_pod<uint64_t>(out, entries);
            if (entries == 0) return;
            mph.save(out);
            write_vec(out, fingerprints);
            write_pod<uint8_t>(out, index_width);
            write_vec(out, payload_indexes);
            values.save(out);
        }

        void load(std::istream& in) {
            entries = read_pod<uint64_t>(in);
            if (entries == 0) return;
            mph.load(in);
            fingerprints = read_vec<uint64_t>(in);
            index_width = read_pod<uint8_t>(in);
            payload_indexes = read_vec<uint8_t>(in);
            values.load(in);
        }
    };

    // grams[n] for n in 1..order; grams must be distinct within each order
    static hash_index build(vocabulary vocab, const std::vector<gram_list>& grams) {
        hash_index h;
        h.m_vocab = std::move(vocab);
        h.m_order = static_cast<uint8_t>(grams.size() - 1);
        check(h.m_order >= 1 && h.m_order <= max_order, "hash index: bad order");
        h.m_tables.resize(h.m_order + 1);
        for (uint8_t n = 1; n <= h.m_order; ++n) {
            order_table& t = h.m_tables[n];
            const gram_list& list = grams[n];
            t.entries = list.size();
            if (list.empty()) continue;

            std::vector<char> keys(list.size() * n * 4);
            std::vector<uint64_t> counts(list.size());
            for (uint64_t i = 0; i < list.size(); ++i) {
                check(list[i].first.size() == n, "hash index: bad gram length");
                std::memcpy(keys.data() + i * n * 4, list[i].first.data(), n * 4);
                counts[i] = list[i].second;
            }
            t.mph = minimal_perfect_hash::build(list.size(), [&](uint64_t i) {
                return std::string_view(keys.data() + i * n * 4, n * 4);
            });

            std::vector<uint64_t> indexes;
            t.values = unique_value_array::build(counts, &indexes);
            uint64_t max_index = t.values.size() ? t.values.size() - 1 : 0;
            t.index_width = static_cast<uint8_t>((bits_for(max_index) + 7) / 8);

            t.fingerprints.assign(list.size(), 0);
            t.payload_indexes.assign(list.size() * t.index_width, 0);
            std::vector<bool> occupied(list.size(), false);
            for (uint64_t i = 0; i < list.size(); ++i) {
                std::string_view key(keys.data() + i * n * 4, n * 4);
                uint64_t slot = t.mph(key);
                check(slot < list.size() && !occupied[slot],
                      "hash index: duplicate gram in the order-" + std::to_string(n) +
                          " input");
                occupied[slot] = true;
                t.fingerprints[slot] = murmur64(key, fingerprint_seed);
                std::memcpy(t.payload_indexes.data() + slot * t.index_width, &indexes[i],
                            t.index_width);
            }
        }
        return h;
    }

    std::optional<uint64_t> lookup(const std::vector<uint32_t>& word_ids) const {
        uint8_t n = static_cast<uint8_t>(word_ids.size());
        if (n == 0 || n > m_order) return std::nullopt;
        const order_table& t = m_tables[n];
        if (t.entries == 0) return std::nullopt;
        std::string_view key(reinterpret_cast<const char*>(word_ids.data()), n * 4);
        uint64_t slot = t.mph(key);
        if (slot >= t.entries) return std::nullopt;
        if (t.fingerprints[slot] != murmur64(key, fingerprint_seed)) return std::nullopt;
        uint64_t index = 0;
        std::memcpy(&index, t.payload_indexes.data() + slot * t.index_width,
                    t.index_width);
        return t.values.value(index);
    }

    std::optional<uint64_t> lookup_tokens(const std::vector<std::string_view>& tokens) const {
        std::vector<uint32_t> ids(tokens.size());
        for (uint64_t i = 0; i < tokens.size(); ++i) {
            auto id = m_vocab.lookup(tokens[i]);
            if (!id) return std::nullopt;
            ids[i] = *id;
        }
        return lookup(ids);
    }

    uint8_t order() const { return m_order; }
    const vocabulary& vocab() const { return m_vocab; }
    uint64_t table_size(uint8_t n) const { return m_tables[n].entries; }

    void save(std::ostream& out) const {
        write_magic(out, "MPHT", 1);
        write_pod<uint8_t>(out, m_order);
        m_vocab.save(out);
        for (uint8_t n = 1; n <= m_order; ++n) m_tables[n].save(out);
    }

    void load(std::istream& in) {
        read_magic(in, "MPHT");
        m_order = read_pod<uint8_t>(in);
        m_vocab.load(in);
        m_tables.assign(m_order + 1, {});
        for (uint8_t n = 1; n <= m_order; ++n) m_tables[n].load(in);
    }

  private:
    uint8_t m_order = 0;
    vocabulary m_vocab;
    std::vector<order_table> m_tables;
};

}  // namespace ngram
