#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "common.hpp"
#include "ngram_record.hpp"

namespace ngram {

// One stable LSD counting-sort pass over a single word column, parallelized
// with a per-thread counter table: thread t's slot for value v starts at
// sum of all counts of values < v plus counts of v in threads before t, so
// the scatter is stable and each thread writes a disjoint region.
inline void counting_sort_pass(std::vector<ngram_record>& recs,
                               std::vector<ngram_record>& scratch, uint32_t column,
                               uint32_t vocab_size, int threads) {
    const uint64_t n = recs.size();
    const uint64_t t_count = std::max(1, threads);
    const uint64_t chunk = (n + t_count - 1) / t_count;
    std::vector<uint64_t> counts(t_count * vocab_size, 0);

#pragma omp parallel for num_threads(t_count) schedule(static)
    for (uint64_t t = 0; t < t_count; ++t) {
        uint64_t lo = t * chunk, hi = std::min(n, lo + chunk);
        uint64_t* c = counts.data() + t * vocab_size;
        for (uint64_t i = lo; i < hi; ++i) ++c[recs[i].words[column]];
    }

    // column-major exclusive scan across (value, thread)
    uint64_t acc = 0;
    for (uint64_t v = 0; v < vocab_size; ++v) {
        for (uint64_t t = 0; t < t_count; ++t) {
            uint64_t& slot = counts[t * vocab_size + v];
            uint64_t c = slot;
            slot = acc;
            acc += c;
        }
    }

#pragma omp parallel for num_threads(t_count) schedule(static)
    for (uint64_t t = 0; t < t_count; ++t) {
        uint64_t lo = t * chunk, hi = std::min(n, lo + chunk);
        uint64_t* c = counts.data() + t * vocab_size;
        for (uint64_t i = lo; i < hi; ++i) scratch[c[recs[i].words[column]]++] = recs[i];
    }
    recs.swap(scratch);
}

// Parallel LSD radix sort into context order (or suffix order): one counting
// pass per word column, least significant key column first.
inline void radix_sort(std::vector<ngram_record>& recs, uint8_t order,
                       uint32_t vocab_size, bool context, int threads = 1) {
    check(order >= 1 && order <= max_order, "radix_sort: bad order");
    std::vector<ngram_record> scratch(recs.size());
    for (uint32_t k = order; k-- > 0;)
        counting_sort_pass(recs, scratch, order_key_column(order, k, context),
                           vocab_size, threads);
}

inline void sort_context_order(std::vector<ngram_record>& recs, uint8_t order,
                               uint32_t vocab_size, int threads = 1) {
    radix_sort(recs, order, vocab_size, true, threads);
}

inline void sort_suffix_order(std::vector<ngram_record>& recs, uint8_t order,
                              uint32_t vocab_size, int threads = 1) {
    radix_sort(recs, order, vocab_size, false, threads);
}

// serial comparison-sort references, kept as test oracles and for benchmarks
inline void sort_context_order_serial(std::vector<ngram_record>& recs, uint8_t order) {
    std::stable_sort(recs.begin(), recs.end(), context_order_less{order});
}

inline void sort_suffix_order_serial(std::vector<ngram_record>& recs, uint8_t order) {
    std::stable_sort(recs.begin(), recs.end(), suffix_order_less{order});
}

// A context-sorted block becomes suffix-sorted with one stable pass on the
// last word alone (the remaining tie-break keys already agree).
inline void last_word_pass(std::vector<ngram_record>& recs, uint8_t order,
                           uint32_t vocab_size, int threads = 1) {
    std::vector<ngram_record> scratch(recs.size());
    counting_sort_pass(recs, scratch, uint32_t(order) - 1, vocab_size, threads);
}

}  // namespace ngram
