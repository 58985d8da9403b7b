#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "adjusting.hpp"
#include "counting.hpp"
#include "last_pass.hpp"
#include "trie_index.hpp"

namespace ngram {

struct estimate_config {
    uint8_t order = 3;
    uint64_t ram_budget = 256ull << 20;
    std::string tmp_dir = ".";
    uint32_t threads = 1;
    uint8_t quant_bits = 8;
    uint8_t remap_k = 0;
    bool bos_eos = false;
    block_encoding encoding = block_encoding::fc_byte;
    uint32_t merge_fan_in = 256;
    uint32_t block_size_l2 = 64;
    uint32_t block_size_rest = 128;
    std::string arpa_path;  // optional text dump of the model
};

struct estimate_report {
    uint64_t tokens = 0;
    uint64_t windows = 0;
    uint64_t flushes = 0;
    uint64_t merges = 0;
    uint64_t top_order_records = 0;
    uint32_t vocab_size = 0;
    std::vector<uint64_t> distinct;  // [n]
};

namespace detail {

// The model in standard ARPA text form: per-order sections of
// "log10(p) TAB gram [TAB log10(backoff)]", grams in natural word order
// (the reverse of the storage path). Values are written before
// quantization.
inline void write_arpa(const std::string& path, const vocabulary& vocab,
                       const trie_raw_levels& raw) {
    std::ofstream out(path);
    check(out.good(), "arpa: cannot open " + path);
    uint8_t order = raw.order;
    std::vector<uint64_t> sizes(order + 1);
    sizes[1] = raw.probs[1].size();
    for (uint8_t n = 2; n <= order; ++n) sizes[n] = raw.ids[n].size();

    out << "\\data\\\n";
    for (uint8_t n = 1; n <= order; ++n)
        out << "ngram " << unsigned(n) << "=" << sizes[n] << "\n";

    std::vector<std::vector<uint64_t>> off(order);
    for (uint8_t n = 1; n < order; ++n) off[n] = raw.offsets(n);

    char buf[64];
    auto log10s = [&](float v) {
        std::snprintf(buf, sizeof(buf), "%.7g", std::log10(double(v)));
        return std::string(buf);
    };
    std::vector<uint32_t> path_ids(order);
    auto emit = [&](std::ostream& os, uint8_t n, uint64_t pos) {
        os << log10s(raw.probs[n][pos]) << "\t";
        for (uint8_t j = n; j >= 1; --j) {  // storage path reversed = text order
            os << vocab.token(path_ids[j - 1]);
            if (j > 1) os << " ";
        }
        if (n < order) os << "\t" << log10s(raw.backoffs[n][pos]);
        os << "\n";
    };
    // depth-first walk; each level's lines go to its own section
    for (uint8_t n = 1; n <= order; ++n) {
        out << "\n\\" << unsigned(n) << "-grams:\n";
        // iterate all level-n entries by walking down from level 1
        auto visit = [&](auto&& self, uint8_t j, uint64_t lo, uint64_t hi) -> void {
            for (uint64_t p = lo; p < hi; ++p) {
                path_ids[j - 1] = raw.ids[j][p];
                if (j == n)
                    emit(out, n, p);
                else
                    self(self, j + 1, off[j][p], off[j][p + 1]);
            }
        };
        for (uint64_t w = 0; w < sizes[1]; ++w) {
            path_ids[0] = static_cast<uint32_t>(w);
            if (n == 1)
                emit(out, 1, w);
            else
                visit(visit, 2, off[1][w], off[1][w + 1]);
        }
    }
    out << "\n\\end\\\n";
}

}  // namespace detail

// Full pipeline: counting (the only sort, in context order), adjusting
// (merge + modified counts + discounts), and the last pass (interpolation,
// backoffs, reverse-trie placement). Output is a pure function of
// (corpus, order, quantization, remapping): the ram budget and thread count
// only affect scheduling.
inline trie_index estimate(const std::string& text_path, const estimate_config& cfg,
                           estimate_report* report = nullptr) {
    check(cfg.order >= 2 && cfg.order <= max_order,
          "estimate: the model order must be in [2, 8]");
    namespace fs = std::filesystem;

    counting_config cc;
    cc.order = cfg.order;
    cc.ram_budget = cfg.ram_budget;
    cc.tmp_dir = cfg.tmp_dir;
    cc.threads = cfg.threads;
    cc.bos_eos = cfg.bos_eos;
    cc.encoding = cfg.encoding;
    auto counted = counting_pass(text_path, cc);
    check(counted.windows > 0, "estimate: the corpus has no order-" +
                                   std::to_string(cfg.order) + " windows");

    uint64_t merges_before = io_stats().merges;
    merge_options mo;
    mo.fan_in = cfg.merge_fan_in;
    mo.encoding = cfg.encoding;
    std::string merged = cfg.tmp_dir + "/top_order.blk";
    auto adjusted = adjusting_pass(counted.block_paths, merged, cfg.order,
                                   counted.vocab.size(), mo);
    for (const auto& p : counted.block_paths) fs::remove(p);

    auto raw = last_pass(adjusted);
    fs::remove(merged);

    if (!cfg.arpa_path.empty()) detail::write_arpa(cfg.arpa_path, counted.vocab, raw);

    if (report) {
        report->tokens = counted.tokens;
        report->windows = counted.windows;
        report->flushes = counted.flushes;
        report->merges = io_stats().merges - merges_before;
        report->top_order_records = adjusted.records;
        report->vocab_size = counted.vocab.size();
        report->distinct = adjusted.distinct;
    }

    trie_config tc;
    tc.remap_k = cfg.remap_k;
    tc.direction = trie_direction::reversed;
    tc.payload = trie_payload::prob_backoff;
    tc.quant_bits = cfg.quant_bits;
    tc.block_size_l2 = cfg.block_size_l2;
    tc.block_size_rest = cfg.block_size_rest;
    return trie_index::from_levels(std::move(counted.vocab), std::move(raw), tc);
}

}  // namespace ngram
