#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "adjusting.hpp"
#include "block_file.hpp"
#include "common.hpp"
#include "smoothing.hpp"
#include "trie_index.hpp"

namespace ngram {

// Final streaming pass: normalization, interpolation and placement. The
// top-order block is context-sorted, so the records form nested runs: all
// records sharing the length n-1 context w[N-n..N-2] are contiguous, and an
// order-n run partitions into order-(n+1) runs by the next word to the
// left. One depth-first sweep therefore computes, for every order, the
// interpolated probability of each distinct gram and the backoff of each
// context, and scatters them into the raw arrays of the reversed trie via
// per-last-word write cursors (count indexing: the cursors start at the
// prefix sums of the "ends a distinct order-n gram" counts, which equal the
// level's sibling-range partition, and placements arrive in suffix order).
struct last_pass_state {
    const adjusting_result& adj;
    uint8_t order;
    trie_raw_levels raw;
    std::vector<std::vector<uint64_t>> positions;  // [n][word] write cursors
    stats_table stats;
    smoothing_stats scratch;  // stats_table needs a sink; totals unused here

    // backoff values for contexts of length >= 2 cannot be written at run
    // time (their trie position is unknown until the whole level is placed),
    // so they are joined after the pass through a search of the raw arrays
    struct backoff_event {
        std::vector<uint32_t> path;  // reversed context, a level-n trie path
        float value;
    };
    std::vector<std::vector<backoff_event>> events;  // [level]

    explicit last_pass_state(const adjusting_result& a) : adj(a), order(a.order) {
        uint32_t v = adj.vocab_size;
        raw.resize(order);
        raw.range_len[1].assign(v, 0);
        raw.probs[1].resize(v);
        raw.backoffs[1].assign(v, 1.0f);
        for (uint32_t w = 0; w < v; ++w) {
            raw.range_len[1][w] = adj.unigram_a[w];
            raw.probs[1][w] = static_cast<float>(adj.unigram_prob(w));
        }
        positions.assign(order + 1, {});
        for (uint8_t n = 2; n <= order; ++n) {
            uint64_t m = adj.distinct[n];
            raw.ids[n].assign(m, 0);
            raw.probs[n].assign(m, 0.0f);
            if (n < order) {
                raw.range_len[n].assign(m, 0);
                raw.backoffs[n].assign(m, 1.0f);
            }
            positions[n] = adj.positions_seed(n);
        }
        stats.init(order - 1, adj.vocab_size);
        scratch.init(order);
        events.assign(order, {});
    }

    // records[b,e) share the length n-1 context; plower[i-b] is the
    // interpolated probability of record i's length n-1 suffix
    void process_run(uint8_t n, const std::vector<ngram_record>& recs, uint64_t b,
                     uint64_t e, const double* plower) {
        // plower[i - b] is the lower-order probability of record i
        const discounts& D = adj.disc;
        double d = 0.0, b_num = 0.0;
        std::vector<double> probs_here(e - b);

        if (n < order) {
            stats.new_run(n);
            // phase 1: re-derive the run's modified counts; remember each
            // distinct gram's first record and its (count-indexed) position
            struct touched_gram {
                uint32_t y;
                uint64_t pos;
                uint64_t first;
            };
            std::vector<touched_gram> touched;
            for (uint64_t i = b; i < e; ++i) {
                uint32_t left = recs[i].words[order - n - 1];
                uint32_t right = recs[i].words[order - 1];
                bool first_touch = false;
                stats.update(n, left, right, scratch, &first_touch);
                if (first_touch) touched.push_back({right, positions[n][right]++, i});
            }
            // phase 2: normalization constants over the distinct grams
            for (const auto& t : touched) {
                uint64_t a = stats.count(n, t.y);
                d += double(a);
                b_num += D(n, a);
            }
            // phase 3: probabilities, placement, and the lower-order buffer
            std::unordered_map<uint32_t, double> run_p;
            for (const auto& t : touched) {
                uint64_t a = stats.count(n, t.y);
                double p = (double(a) - D(n, a)) / d +
                           (b_num / d) * plower[t.first - b];
                run_p[t.y] = p;
                raw.ids[n][t.pos] = recs[t.first].words[order - n];
                raw.probs[n][t.pos] = static_cast<float>(p);
                // pointer counts: a(gram) is also the number of children
                raw.range_len[n][t.pos] = a;
            }
            for (uint64_t i = b; i < e; ++i)
                probs_here[i - b] = run_p[recs[i].words[order - 1]];
        } else {
            // top order: every record is a distinct gram with its raw count
            for (uint64_t i = b; i < e; ++i) {
                d += double(recs[i].count);
                b_num += D(n, recs[i].count);
            }
            for (uint64_t i = b; i < e; ++i) {
                uint64_t c = recs[i].count;
                double p = (double(c) - D(n, c)) / d + (b_num / d) * plower[i - b];
                uint32_t y = recs[i].words[order - 1];
                uint64_t pos = positions[n][y]++;
                raw.ids[n][pos] = recs[i].words[0];
                raw.probs[n][pos] = static_cast<float>(p);
            }
        }

        // the run's context backs off with weight b_num/d
        float bo = static_cast<float>(b_num / d);
        if (n == 2) {
            raw.backoffs[1][recs[b].words[order - 2]] = bo;
        } else {
            std::vector<uint32_t> path(n - 1);
            for (uint8_t j = 0; j < n - 1; ++j) path[j] = recs[b].words[order - 2 - j];
            events[n - 1].push_back({std::move(path), bo});
        }

        if (n == order) return;
        // recurse into the order-(n+1) runs, split by the next word left
        uint64_t i = b;
        while (i < e) {
            uint64_t j = i;
            uint32_t key = recs[i].words[order - n - 1];
            while (j < e && recs[j].words[order - n - 1] == key) ++j;
            process_run(n + 1, recs, i, j, probs_here.data() + (i - b));
            i = j;
        }
    }

    void run(const std::string& block_path) {
        block_reader reader(block_path);
        std::vector<ngram_record> buffer;
        ngram_record rec;
        auto flush = [&]() {
            if (buffer.empty()) return;
            std::vector<double> plower(buffer.size());
            for (uint64_t i = 0; i < buffer.size(); ++i)
                plower[i] = adj.unigram_prob(buffer[i].words[order - 1]);
            process_run(2, buffer, 0, buffer.size(), plower.data());
            buffer.clear();
        };
        while (reader.next(rec)) {
            if (!buffer.empty() && buffer.front().words[order - 2] != rec.words[order - 2])
                flush();
            buffer.push_back(rec);
        }
        flush();
        join_backoffs();
    }

    // resolve each buffered backoff context against the completed raw
    // arrays; contexts that were never stored as grams (their own top-order
    // window fell off a line boundary) keep the default backoff of 1
    void join_backoffs() {
        std::vector<std::vector<uint64_t>> off(order);
        for (uint8_t n = 1; n < order; ++n) off[n] = raw.offsets(n);
        for (uint8_t lvl = 2; lvl < order; ++lvl) {
            for (const auto& ev : events[lvl]) {
                uint64_t pos = ev.path[0];
                bool found = pos < raw.range_len[1].size();
                for (uint8_t j = 2; found && j <= lvl; ++j) {
                    uint64_t lo = off[j - 1][pos], hi = off[j - 1][pos + 1];
                    auto begin = raw.ids[j].begin();
                    auto it = std::lower_bound(begin + lo, begin + hi, ev.path[j - 1]);
                    found = it != begin + hi && *it == ev.path[j - 1];
                    pos = static_cast<uint64_t>(it - begin);
                }
                if (found) raw.backoffs[lvl][pos] = ev.value;
            }
        }
    }
};

// Runs the last pass over the merged top-order block and returns the filled
// raw arrays of the reversed trie (probability/backoff payloads).
inline trie_raw_levels last_pass(const adjusting_result& adj) {
    last_pass_state state(adj);
    state.run(adj.block_path);
    return std::move(state.raw);
}

}  // namespace ngram
