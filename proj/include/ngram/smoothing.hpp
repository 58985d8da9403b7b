#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"

namespace ngram {

// Lazily-reset per-order statistics used while streaming context-sorted
// records: one entry per vocabulary word, tracking the number of distinct
// left-extending words (the modified count a) of "context + word". Entries
// are never cleared in bulk; a stale entry is detected by its range stamp.
struct stats_entry {
    uint32_t left = 0;
    uint32_t count = 0;
    uint64_t range = 0;
    bool has_left = false;
};

// t_{n,k} totals: the number of order-n grams whose modified count equals k,
// for k in [1,4]. Per-run deltas R use k up to 5 transiently: when a gram's
// count grows past 4 its k=4 contribution must be retracted exactly once.
struct smoothing_stats {
    uint8_t order = 0;
    std::array<std::array<int64_t, 6>, max_order + 1> t{};  // folded totals
    std::array<std::array<int64_t, 6>, max_order + 1> r{};  // per-run deltas

    void init(uint8_t n) {
        order = n;
        for (auto& row : t) row.fill(0);
        for (auto& row : r) row.fill(0);
    }

    void bump(uint8_t n, uint32_t k) {
        if (k == 1)
            ++r[n][1];
        else if (k <= 5) {
            ++r[n][k];
            --r[n][k - 1];
        }
    }

    void fold(uint8_t n) {
        for (int k = 1; k <= 5; ++k) {
            t[n][k] += r[n][k];
            r[n][k] = 0;
        }
    }

    void fold_all() {
        for (uint8_t n = 1; n <= order; ++n) fold(n);
    }
};

struct stats_table {
    uint8_t order = 0;  // tables cover orders 1..order
    std::vector<std::vector<stats_entry>> entries;  // [n][word]
    std::array<uint64_t, max_order + 1> ranges{};

    void init(uint8_t n, uint32_t vocab_size) {
        order = n;
        entries.assign(n + 1, std::vector<stats_entry>(vocab_size));
        ranges.fill(1);
    }

    void new_run(uint8_t n) { ++ranges[n]; }

    // returns the updated modified count a; 0 means "no change" (duplicate
    // left extension). first_touch reports whether this is the entry's first
    // update within the current run.
    uint32_t update(uint8_t n, uint32_t left, uint32_t right, smoothing_stats& sm,
                    bool* first_touch = nullptr) {
        stats_entry& e = entries[n][right];
        bool fresh = n > 1 && e.range != ranges[n];
        if (fresh) {
            e.count = 0;
            e.has_left = false;
            e.range = ranges[n];
        }
        if (first_touch) *first_touch = fresh || (n == 1 && e.count == 0);
        if (e.has_left && e.left == left) return 0;
        e.left = left;
        e.has_left = true;
        ++e.count;
        sm.bump(n, e.count);
        return e.count;
    }

    uint32_t count(uint8_t n, uint32_t word) const {
        const stats_entry& e = entries[n][word];
        if (n > 1 && e.range != ranges[n]) return 0;
        return e.count;
    }
};

// Modified Kneser-Ney discounts, one set per order: D[n][0] = 0 and
// D[n][k] = k - (k+1) * t1 * t_{k+1} / ((t1 + 2*t2) * t_k) for k = 1..3,
// where t_k are the smoothing totals of order n. Counts of 3 or more all
// use D[n][3].
struct discounts {
    std::array<std::array<double, 4>, max_order + 1> d{};

    static discounts compute(const smoothing_stats& sm) {
        discounts out;
        for (uint8_t n = 1; n <= sm.order; ++n) {
            out.d[n][0] = 0.0;
            double t1 = double(sm.t[n][1]);
            double t2 = double(sm.t[n][2]);
            for (int k = 1; k <= 3; ++k) {
                double tk = double(sm.t[n][k]);
                double tk1 = double(sm.t[n][k + 1]);
                double denom = (t1 + 2.0 * t2) * tk;
                check(t1 > 0 && denom != 0.0,
                      "discounts: degenerate statistics at order " + std::to_string(n) +
                          ", k=" + std::to_string(k) + " (corpus too small)");
                double v = k - (k + 1) * t1 * tk1 / denom;
                check(v >= 0.0 && v <= double(k),
                      "discounts: value outside [0,k] at order " + std::to_string(n) +
                          ", k=" + std::to_string(k) + " (corpus too small)");
                out.d[n][k] = v;
            }
        }
        return out;
    }

    double operator()(uint8_t n, uint64_t count) const {
        return d[n][count < 3 ? count : 3];
    }
};

}  // namespace ngram
