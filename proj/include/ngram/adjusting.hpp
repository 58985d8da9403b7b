#pragma once

#include <string>
#include <vector>

#include "block_file.hpp"
#include "common.hpp"
#include "merge.hpp"
#include "ngram_record.hpp"
#include "smoothing.hpp"

namespace ngram {

struct adjusting_result {
    uint8_t order = 0;
    uint32_t vocab_size = 0;
    std::string block_path;  // the merged, deduplicated top-order block
    uint64_t records = 0;    // distinct top-order grams

    smoothing_stats smoothing;
    discounts disc;
    std::vector<uint32_t> unigram_a;                     // modified unigram counts
    std::vector<std::vector<uint64_t>> last_word_counts; // [n][word]: distinct
                                                         // order-n grams ending there
    std::vector<uint64_t> distinct;                      // [n]: distinct order-n grams
    uint64_t m2 = 0;      // distinct bigrams = unigram normalization denominator
    double b_eps = 0.0;   // empty-context backoff mass

    double unigram_prob(uint32_t word) const {
        uint64_t a = word < unigram_a.size() ? unigram_a[word] : 0;
        double u = a ? (double(a) - disc(1, a)) / double(m2) : 0.0;
        return u + b_eps / double(vocab_size);
    }

    // exclusive prefix sums of last_word_counts[n]: the initial write cursors
    // for placing order-n grams in suffix order
    std::vector<uint64_t> positions_seed(uint8_t n) const {
        std::vector<uint64_t> pos(last_word_counts[n].size(), 0);
        uint64_t acc = 0;
        for (uint64_t w = 0; w < pos.size(); ++w) {
            pos[w] = acc;
            acc += last_word_counts[n][w];
        }
        return pos;
    }
};

// Streams the context-sorted top-order stream once, deriving for every
// lower order n the modified counts a(g) = |{x : x·g occurs}| via the
// lazily-reset statistics tables, together with the smoothing totals
// t_{n,k}, the per-word "ends a distinct order-n gram" counts, and the
// distinct-gram totals. Top order uses raw counts.
struct extension_scanner {
    uint8_t order;
    uint32_t vocab_size;
    stats_table stats;
    smoothing_stats smoothing;
    std::vector<std::vector<uint64_t>> last_word_counts;
    std::vector<uint64_t> distinct;
    ngram_record prev{};
    bool has_prev = false;

    extension_scanner(uint8_t n, uint32_t v) : order(n), vocab_size(v) {
        stats.init(n > 1 ? n - 1 : 1, v);
        smoothing.init(n);
        last_word_counts.assign(n + 1, std::vector<uint64_t>(v, 0));
        distinct.assign(n + 1, 0);
    }

    void consume(const ngram_record& rec) {
        uint8_t n_max = order - 1;
        for (uint8_t n = 1; n <= n_max; ++n) {
            // run key: the length n-1 context w[order-n .. order-2]
            if (n > 1 && has_prev) {
                bool same = true;
                for (uint8_t c = order - n; c + 1 < order && same; ++c)
                    same = prev.words[c] == rec.words[c];
                if (!same) {
                    stats.new_run(n);
                    smoothing.fold(n);
                }
            }
            uint32_t left = rec.words[order - n - 1];
            uint32_t right = rec.words[order - 1];
            uint32_t a = stats.update(n, left, right, smoothing);
            if (a == 1) {  // first left extension: a new distinct order-n gram
                ++distinct[n];
                ++last_word_counts[n][right];
            }
        }
        // top order: every record is a distinct gram with its raw count
        ++distinct[order];
        ++last_word_counts[order][rec.words[order - 1]];
        if (rec.count <= 4) ++smoothing.r[order][rec.count];
        prev = rec;
        has_prev = true;
    }

    void finish() { smoothing.fold_all(); }
};

// Merges the counting blocks (combining duplicates) into the single
// top-order block file and collects all smoothing state from one streaming
// scan of it. This is the only external sort of the pipeline: no record of
// order below the top is ever written to disk.
inline adjusting_result adjusting_pass(const std::vector<std::string>& block_paths,
                                       const std::string& merged_path, uint8_t order,
                                       uint32_t vocab_size,
                                       const merge_options& opt = {}) {
    check(order >= 2, "adjusting: the model order must be at least 2");
    merge_block_files(block_paths, merged_path, opt);

    adjusting_result res;
    res.order = order;
    res.vocab_size = vocab_size;
    res.block_path = merged_path;

    extension_scanner scan(order, vocab_size);
    block_reader reader(merged_path);
    ngram_record rec;
    while (reader.next(rec)) {
        scan.consume(rec);
        ++res.records;
    }
    scan.finish();

    res.smoothing = scan.smoothing;
    res.disc = discounts::compute(res.smoothing);
    res.unigram_a.assign(vocab_size, 0);
    for (uint32_t w = 0; w < vocab_size; ++w)
        res.unigram_a[w] = scan.stats.count(1, w);
    res.last_word_counts = std::move(scan.last_word_counts);
    res.distinct = std::move(scan.distinct);

    for (uint32_t w = 0; w < vocab_size; ++w) res.m2 += res.unigram_a[w];

    // empty-context backoff: the unigram discount mass over m2. N_k is the
    // number of unigrams with modified count k (3+ pooled).
    uint64_t n_pos = 0;
    for (uint32_t w = 0; w < vocab_size; ++w) n_pos += res.unigram_a[w] > 0;
    double n1 = double(res.smoothing.t[1][1]);
    double n2 = double(res.smoothing.t[1][2]);
    double n3p = double(n_pos) - n1 - n2;
    res.b_eps = (res.disc.d[1][1] * n1 + res.disc.d[1][2] * n2 +
                 res.disc.d[1][3] * n3p) /
                double(res.m2);
    return res;
}

}  // namespace ngram
