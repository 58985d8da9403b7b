#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "hashing.hpp"
#include "io.hpp"
#include "mph.hpp"

namespace ngram {

// Token dictionary: ids are assigned in nonincreasing order of total
// occurrence (ties broken lexicographically) so frequent tokens get small
// ids, which is what keeps the id sequences compressible. Token -> id goes
// through a minimal perfect hash; a 64-bit fingerprint per slot rejects
// tokens outside the key set.
struct vocabulary {
    static constexpr const char* unk_token = "<unk>";
    static constexpr uint64_t fingerprint_seed = 0x5851F42D4C957F2DULL;

    vocabulary() = default;

    static vocabulary build(std::vector<std::pair<std::string, uint64_t>> tokens) {
        bool has_unk = false;
        for (const auto& [t, _] : tokens)
            if (t == unk_token) has_unk = true;
        if (!has_unk) tokens.push_back({unk_token, 0});
        std::sort(tokens.begin(), tokens.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        vocabulary v;
        v.m_tokens.reserve(tokens.size());
        for (auto& [t, _] : tokens) v.m_tokens.push_back(std::move(t));
        v.finish();
        return v;
    }

    std::optional<uint32_t> lookup(std::string_view token) const {
        uint64_t slot = m_mph(token);
        if (slot >= m_tokens.size()) return std::nullopt;
        if (m_fingerprints[slot] != murmur64(token, fingerprint_seed)) return std::nullopt;
        return m_slot_to_id[slot];
    }

    std::string_view token(uint32_t id) const {
        check(id < m_tokens.size(), "vocabulary: id out of range");
        return m_tokens[id];
    }

    uint32_t unk_id() const { return m_unk_id; }
    uint32_t size() const { return static_cast<uint32_t>(m_tokens.size()); }

    void save(std::ostream& out) const {
        write_magic(out, "VOCB", 1);
        write_pod<uint64_t>(out, m_tokens.size());
        for (const auto& t : m_tokens) write_string(out, t);
        m_mph.save(out);
        write_vec(out, m_fingerprints);
        write_vec(out, m_slot_to_id);
        write_pod<uint32_t>(out, m_unk_id);
    }

    void load(std::istream& in) {
        read_magic(in, "VOCB");
        uint64_t n = read_pod<uint64_t>(in);
        m_tokens.resize(n);
        for (auto& t : m_tokens) t = read_string(in);
        m_mph.load(in);
        m_fingerprints = read_vec<uint64_t>(in);
        m_slot_to_id = read_vec<uint32_t>(in);
        m_unk_id = read_pod<uint32_t>(in);
    }

  private:
    void finish() {
        uint64_t n = m_tokens.size();
        m_mph = minimal_perfect_hash::build(
            n, [this](uint64_t i) { return std::string_view(m_tokens[i]); });
        m_fingerprints.assign(n, 0);
        m_slot_to_id.assign(n, 0);
        m_unk_id = 0;
        for (uint64_t id = 0; id < n; ++id) {
            uint64_t slot = m_mph(m_tokens[id]);
            check(slot < n, "vocabulary: hash construction broken");
            m_fingerprints[slot] = murmur64(m_tokens[id], fingerprint_seed);
            m_slot_to_id[slot] = static_cast<uint32_t>(id);
            if (m_tokens[id] == unk_token) m_unk_id = static_cast<uint32_t>(id);
        }
    }

    std::vector<std::string> m_tokens;
    minimal_perfect_hash m_mph;
    std::vector<uint64_t> m_fingerprints;
    std::vector<uint32_t> m_slot_to_id;
    uint32_t m_unk_id = 0;
};

}  // namespace ngram
