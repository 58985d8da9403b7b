#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "block_file.hpp"
#include "common.hpp"
#include "hashing.hpp"
#include "ngram_record.hpp"
#include "sort.hpp"
#include "vocabulary.hpp"

namespace ngram {

inline const std::string bos_token = "<s>";
inline const std::string eos_token = "</s>";

struct counting_config {
    uint8_t order = 3;
    uint64_t ram_budget = 256ull << 20;
    std::string tmp_dir = ".";
    uint32_t threads = 1;
    bool bos_eos = false;  // inject sentence-boundary markers
    block_encoding encoding = block_encoding::fc_byte;
    uint32_t window_bytes = 1u << 20;
};

struct counting_result {
    vocabulary vocab;
    std::vector<std::string> block_paths;
    uint64_t tokens = 0;
    uint64_t windows = 0;
    uint64_t flushes = 0;
};

namespace detail {

inline void for_each_token(const std::string& line, auto&& f) {
    uint64_t i = 0, n = line.size();
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        uint64_t b = i;
        while (i < n && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > b) f(std::string_view(line).substr(b, i - b));
    }
}

// Open-addressing set of n-gram records with linear probing. Fixed capacity;
// the caller flushes when the load factor cap is hit.
struct record_set {
    explicit record_set(uint64_t slots, uint8_t order) : m_order(order) {
        uint64_t cap = 1024;
        while (cap < slots) cap <<= 1;
        m_slots.assign(cap, {});
        m_used.assign(cap, false);
        m_mask = cap - 1;
        m_limit = cap - cap / 4;  // load factor 0.75
    }

    bool full() const { return m_size >= m_limit; }
    uint64_t size() const { return m_size; }

    void add(const ngram_record& r) {
        uint64_t h = murmur64(r.words.data(), m_order * 4, 0x2545F4914F6CDD1Dull) & m_mask;
        while (m_used[h]) {
            if (m_slots[h].same_words(r, m_order)) {
                m_slots[h].count += r.count;
                return;
            }
            h = (h + 1) & m_mask;
        }
        m_used[h] = true;
        m_slots[h] = r;
        ++m_size;
    }

    std::vector<ngram_record> drain() {
        std::vector<ngram_record> out;
        out.reserve(m_size);
        for (uint64_t i = 0; i < m_slots.size(); ++i)
            if (m_used[i]) out.push_back(m_slots[i]);
        std::fill(m_used.begin(), m_used.end(), false);
        m_size = 0;
        return out;
    }

    uint8_t m_order;
    std::vector<ngram_record> m_slots;
    std::vector<bool> m_used;
    uint64_t m_mask = 0, m_limit = 0, m_size = 0;
};

}  // namespace detail

// First corpus scan: whitespace-tokenized, one sentence per line; produces
// the vocabulary (ids by descending token frequency, ties lexicographic).
inline vocabulary scan_vocabulary(const std::string& text_path, bool bos_eos) {
    std::ifstream in(text_path);
    check(in.good(), "counting: cannot open " + text_path);
    std::unordered_map<std::string, uint64_t> freq;
    std::string line;
    while (std::getline(in, line)) {
        bool any = false;
        detail::for_each_token(line, [&](std::string_view t) {
            ++freq[std::string(t)];
            any = true;
        });
        if (bos_eos && any) {
            ++freq[bos_token];
            ++freq[eos_token];
        }
    }
    std::vector<std::pair<std::string, uint64_t>> items(freq.begin(), freq.end());
    return vocabulary::build(std::move(items));
}

// Second scan: slide a window of `order` words over each line (never across
// lines), aggregate occurrences in a hash set sized by the ram budget, and
// flush each full set as a context-sorted front-coded block file. Sorting
// and writing of a full set overlap with scanning the next one.
inline counting_result counting_pass(const std::string& text_path,
                                     const counting_config& cfg) {
    check(cfg.order >= 1 && cfg.order <= max_order, "counting: bad order");
    counting_result res;
    res.vocab = scan_vocabulary(text_path, cfg.bos_eos);

    uint64_t slot_bytes = sizeof(ngram_record) + 1;
    uint64_t slots = std::max<uint64_t>(1024, cfg.ram_budget / slot_bytes);
    detail::record_set active(slots, cfg.order);
    detail::record_set spare(slots, cfg.order);

    std::thread flusher;
    auto flush = [&](detail::record_set& set) {
        if (set.size() == 0) return;
        if (flusher.joinable()) flusher.join();
        std::swap(active, spare);  // caller passed `active`; keep writing into it
        std::string path = cfg.tmp_dir + "/counts_" + std::to_string(res.flushes) + ".blk";
        res.block_paths.push_back(path);
        ++res.flushes;
        uint32_t vocab_size = res.vocab.size();
        flusher = std::thread([&spare, path, &cfg, vocab_size]() {
            auto recs = spare.drain();
            sort_context_order(recs, cfg.order, vocab_size, static_cast<int>(cfg.threads));
            block_header h;
            h.order = cfg.order;
            h.encoding = cfg.encoding;
            h.window_bytes = cfg.window_bytes;
            h.ordering = block_ordering::context;
            block_writer w(path, h);
            for (const auto& r : recs) w.write(r);
            w.close();
        });
    };

    std::ifstream in(text_path);
    check(in.good(), "counting: cannot open " + text_path);
    std::string line;
    std::vector<uint32_t> ids;
    uint32_t bos_id = 0, eos_id = 0;
    if (cfg.bos_eos) {
        auto b = res.vocab.lookup(bos_token);
        auto e = res.vocab.lookup(eos_token);
        check(b && e, "counting: boundary tokens missing from the vocabulary");
        bos_id = *b;
        eos_id = *e;
    }
    while (std::getline(in, line)) {
        ids.clear();
        if (cfg.bos_eos) ids.assign(cfg.order - 1, bos_id);
        uint64_t real = 0;
        detail::for_each_token(line, [&](std::string_view t) {
            auto id = res.vocab.lookup(t);
            check(id.has_value(), "counting: token missing from the vocabulary");
            ids.push_back(*id);
            ++real;
        });
        res.tokens += real;
        if (real == 0) continue;
        if (cfg.bos_eos) ids.push_back(eos_id);
        if (ids.size() < cfg.order) continue;
        for (uint64_t i = 0; i + cfg.order <= ids.size(); ++i) {
            ngram_record r;
            for (uint8_t k = 0; k < cfg.order; ++k) r.words[k] = ids[i + k];
            r.count = 1;
            active.add(r);
            ++res.windows;
            if (active.full()) flush(active);
        }
    }
    flush(active);
    if (flusher.joinable()) flusher.join();
    return res;
}

}  // namespace ngram
