#pragma once

#include <filesystem>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "block_file.hpp"
#include "common.hpp"
#include "ngram_record.hpp"

namespace ngram {

// K-way merge of sorted block files into one block file, optionally summing
// the counts of duplicate grams. The fan-in is capped; larger inputs are
// merged hierarchically through temporary files. Each input stream is
// validated against the expected ordering while it drains.
struct merge_options {
    bool combine_counts = true;
    uint32_t fan_in = 256;
    block_encoding encoding = block_encoding::fc_byte;
    uint32_t window_bytes = 64 * 1024 * 1024;
};

namespace detail {

struct merge_source {
    std::unique_ptr<block_reader> reader;
    ngram_record current;
    uint64_t index;  // input position, tie-break for stability
};

inline void merge_once(const std::vector<std::string>& inputs, const std::string& output,
                       const merge_options& opt) {
    std::vector<merge_source> sources;
    uint8_t order = 0;
    block_ordering ordering = block_ordering::unsorted;
    for (uint64_t i = 0; i < inputs.size(); ++i) {
        auto r = std::make_unique<block_reader>(inputs[i]);
        check(r->header().ordering != block_ordering::unsorted,
              "merge: input block is not sorted: " + inputs[i]);
        if (sources.empty()) {
            order = r->header().order;
            ordering = r->header().ordering;
        } else {
            check(order == r->header().order && ordering == r->header().ordering,
                  "merge: inputs disagree on order/ordering");
        }
        ngram_record first;
        if (r->next(first)) sources.push_back({std::move(r), first, i});
    }

    context_order_less ctx_less{order};
    suffix_order_less suf_less{order};
    auto less = [&](const ngram_record& a, const ngram_record& b) {
        return ordering == block_ordering::context ? ctx_less(a, b) : suf_less(a, b);
    };
    auto heap_greater = [&](const merge_source* a, const merge_source* b) {
        if (less(a->current, b->current)) return false;
        if (less(b->current, a->current)) return true;
        return a->index > b->index;
    };
    std::priority_queue<merge_source*, std::vector<merge_source*>, decltype(heap_greater)>
        heap(heap_greater);
    for (auto& s : sources) heap.push(&s);

    block_header out_header;
    out_header.order = order;
    out_header.encoding = opt.encoding;
    out_header.window_bytes = opt.window_bytes;
    out_header.ordering = ordering;
    block_writer writer(output, out_header);

    bool have_pending = false;
    ngram_record pending;
    while (!heap.empty()) {
        merge_source* s = heap.top();
        heap.pop();
        ngram_record r = s->current;
        if (have_pending) {
            check(!less(r, pending), "merge: input stream violates its declared order");
            if (opt.combine_counts && pending.same_words(r, order)) {
                pending.count += r.count;
            } else {
                writer.write(pending);
                pending = r;
            }
        } else {
            pending = r;
            have_pending = true;
        }
        ngram_record next;
        if (s->reader->next(next)) {
            check(!less(next, s->current), "merge: input stream violates its declared order");
            s->current = next;
            heap.push(s);
        }
    }
    if (have_pending) writer.write(pending);
    writer.close();
    ++io_stats().merges;
}

}  // namespace detail

inline void merge_block_files(std::vector<std::string> inputs, const std::string& output,
                              const merge_options& opt = {}) {
    check(!inputs.empty(), "merge: no inputs");
    check(opt.fan_in >= 2, "merge: fan-in must be at least 2");
    uint64_t round = 0;
    std::vector<std::string> temps;
    while (inputs.size() > opt.fan_in) {
        std::vector<std::string> reduced;
        for (uint64_t i = 0; i < inputs.size(); i += opt.fan_in) {
            std::vector<std::string> group(
                inputs.begin() + i,
                inputs.begin() + std::min<uint64_t>(i + opt.fan_in, inputs.size()));
            if (group.size() == 1) {
                reduced.push_back(group[0]);
                continue;
            }
            std::string tmp = output + ".merge" + std::to_string(round) + "_" +
                              std::to_string(i / opt.fan_in);
            detail::merge_once(group, tmp, opt);
            temps.push_back(tmp);
            reduced.push_back(tmp);
        }
        inputs = std::move(reduced);
        ++round;
    }
    detail::merge_once(inputs, output, opt);
    for (const auto& t : temps) std::filesystem::remove(t);
}

}  // namespace ngram
