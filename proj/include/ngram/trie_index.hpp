#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bit_vector.hpp"
#include "codeword_array.hpp"
#include "common.hpp"
#include "elias_fano.hpp"
#include "io.hpp"
#include "partitioned_sequence.hpp"
#include "quantization.hpp"
#include "unique_values.hpp"
#include "vocabulary.hpp"

namespace ngram {

enum class trie_payload : uint8_t { counts = 0, prob_backoff = 1 };
enum class trie_direction : uint8_t { forward = 0, reversed = 1 };

struct trie_config {
    uint8_t remap_k = 0;  // context length of identifier remapping; 0 disables
    trie_direction direction = trie_direction::forward;
    trie_payload payload = trie_payload::counts;
    uint8_t quant_bits = 8;
    uint32_t block_size_l2 = 64;    // partition size for the level-2 id sequence
    uint32_t block_size_rest = 128; // partition size for levels >= 3
    bool counts_as_pef = false;     // count indexes: codewords (default) or prefix-sum PEF
};

// Raw per-level arrays a trie is assembled from. Level n (1-based) holds one
// entry per distinct order-n gram path, sorted lexicographically by path;
// level-1 positions coincide with vocabulary ids.
struct trie_raw_levels {
    uint8_t order = 0;
    std::vector<std::vector<uint32_t>> ids;        // ids[n], n >= 2: last path word
    std::vector<std::vector<uint64_t>> range_len;  // range_len[n], n < order: children at n+1
    std::vector<std::vector<uint64_t>> counts;     // counts payload, per level
    std::vector<std::vector<float>> probs;         // prob payload, per level
    std::vector<std::vector<float>> backoffs;      // prob payload, n < order

    void resize(uint8_t n) {
        order = n;
        ids.assign(n + 1, {});
        range_len.assign(n + 1, {});
        counts.assign(n + 1, {});
        probs.assign(n + 1, {});
        backoffs.assign(n + 1, {});
    }

    uint64_t level_size(uint8_t n) const {
        if (n == 1) return range_len.size() > 1 && order > 1 ? range_len[1].size()
                                                            : (counts[1].empty() ? probs[1].size() : counts[1].size());
        return ids[n].size();
    }

    // exclusive prefix sums of range_len[n], used for parent-child ranges
    std::vector<uint64_t> offsets(uint8_t n) const {
        std::vector<uint64_t> off(range_len[n].size() + 1, 0);
        for (uint64_t i = 0; i < range_len[n].size(); ++i)
            off[i + 1] = off[i] + range_len[n][i];
        return off;
    }
};

struct trie_stats {
    struct level_stats {
        uint64_t entries = 0;
        uint64_t id_bits = 0;
        uint64_t pointer_bits = 0;
        uint64_t payload_bits = 0;
    };
    std::vector<level_stats> levels;  // [1..order]
    uint64_t total_entries = 0;
    uint64_t total_id_bits = 0;
    uint64_t total_bits = 0;
};

// Compressed n-gram trie. Each level stores its last-path-word ids as a
// range-wise prefix-summed monotone sequence (partitioned Elias-Fano) and
// its child ranges as prefix-summed pointers (plain Elias-Fano). With
// remapping k > 0, levels above k+1 store each word as its position among
// the followers of its length-k context; the first k+1 levels stay unmapped
// and double as the mapper structure.
struct trie_index {
    struct level {
        uint64_t entries = 0;
        partitioned_sequence ids;   // levels >= 2
        elias_fano pointers;        // levels < order
        // counts payload
        codeword_array count_codes;
        partitioned_sequence count_pef;
        unique_value_array count_values;
        // prob/backoff payload
        std::vector<float> raw_probs;     // level 1 (unquantized)
        std::vector<float> raw_backoffs;  // level 1
        bit_vector prob_bits;
        bit_vector backoff_bits;
        binning_quantizer prob_quant;
        binning_quantizer backoff_quant;
    };

    struct payload_result {
        uint8_t order = 0;
        uint64_t count = 0;
        float prob = 0;
        float backoff = 1.0f;
    };

    trie_index() = default;

    // ---- construction ----

    static trie_index from_levels(vocabulary vocab, trie_raw_levels raw,
                                  const trie_config& cfg) {
        trie_index t;
        t.m_vocab = std::move(vocab);
        t.m_cfg = cfg;
        t.m_order = raw.order;
        check(t.m_order >= 1 && t.m_order <= max_order, "trie: bad order");
        check(cfg.remap_k + 1 < t.m_order || cfg.remap_k == 0,
              "trie: remap context length must satisfy k <= order - 2");

        if (cfg.remap_k > 0) apply_remapping(raw, cfg.remap_k);

        t.m_levels.resize(t.m_order + 1);
        for (uint8_t n = 1; n <= t.m_order; ++n) {
            level& lv = t.m_levels[n];
            lv.entries = n == 1 ? (cfg.payload == trie_payload::counts
                                       ? raw.counts[1].size()
                                       : raw.probs[1].size())
                                : raw.ids[n].size();
            if (n >= 2) {
                // range-wise prefix sums make the level id sequence monotone
                auto off = raw.offsets(n - 1);
                std::vector<uint64_t> stored(raw.ids[n].size());
                uint64_t base = 0;
                for (uint64_t r = 0; r + 1 < off.size(); ++r) {
                    for (uint64_t p = off[r]; p < off[r + 1]; ++p) {
                        stored[p] = raw.ids[n][p] + base;
                    }
                    if (off[r + 1] > off[r]) base = stored[off[r + 1] - 1];
                }
                uint64_t u = stored.empty() ? 0 : stored.back();
                lv.ids = partitioned_sequence::encode(
                    stored, u, n == 2 ? cfg.block_size_l2 : cfg.block_size_rest);
            }
            if (n < t.m_order) {
                auto off = raw.offsets(n);
                check(off.size() == lv.entries + 1, "trie: pointer/entry size mismatch");
                lv.pointers = elias_fano::encode(off, off.back());
            }
            if (cfg.payload == trie_payload::counts) {
                std::vector<uint64_t> indexes;
                lv.count_values = unique_value_array::build(raw.counts[n], &indexes);
                if (cfg.counts_as_pef) {
                    std::vector<uint64_t> sums(indexes.size());
                    uint64_t acc = 0;
                    for (uint64_t i = 0; i < indexes.size(); ++i)
                        sums[i] = (acc += indexes[i] + 1);
                    lv.count_pef = partitioned_sequence::encode(sums, acc, cfg.block_size_rest);
                } else {
                    lv.count_codes = codeword_array::build(indexes);
                }
            } else {
                if (n == 1) {
                    lv.raw_probs = std::move(raw.probs[1]);
                    if (t.m_order > 1) lv.raw_backoffs = std::move(raw.backoffs[1]);
                } else {
                    std::vector<uint32_t> assign;
                    lv.prob_quant = binning_quantizer::train(raw.probs[n], cfg.quant_bits, &assign);
                    lv.prob_bits = pack(assign, cfg.quant_bits);
                    if (n < t.m_order) {
                        lv.backoff_quant =
                            binning_quantizer::train(raw.backoffs[n], cfg.quant_bits, &assign);
                        lv.backoff_bits = pack(assign, cfg.quant_bits);
                    }
                }
            }
        }
        return t;
    }

    // grams[n] (n in 1..order) must hold distinct (path, count) pairs sorted
    // lexicographically by path; paths are in storage direction already
    using gram_list = std::vector<std::pair<std::vector<uint32_t>, uint64_t>>;

    static trie_index build(vocabulary vocab, const std::vector<gram_list>& grams,
                            const trie_config& cfg) {
        uint8_t order = static_cast<uint8_t>(grams.size() - 1);
        check(order >= 1 && order <= max_order, "trie: bad order");
        trie_raw_levels raw;
        raw.resize(order);
        uint32_t v = vocab.size();

        // level 1 positions are vocabulary ids; the level spans the smallest
        // contiguous id range covering the unigram list, absent ids get count 0
        uint32_t m1 = grams[1].empty() ? 0 : grams[1].back().first[0] + 1;
        raw.counts[1].assign(m1, 0);
        if (order > 1) raw.range_len[1].assign(m1, 0);
        for (uint64_t i = 0; i < grams[1].size(); ++i) {
            const auto& path = grams[1][i].first;
            check(path.size() == 1, "trie: bad gram length at level 1");
            check(path[0] < v, "trie: gram id exceeds vocabulary");
            check(i == 0 || grams[1][i - 1].first[0] < path[0],
                  "trie: gram stream is not sorted or has duplicates");
            raw.counts[1][path[0]] = grams[1][i].second;
        }

        for (uint8_t n = 2; n <= order; ++n) {
            const gram_list& list = grams[n];
            const gram_list& parents = grams[n - 1];
            uint64_t parent_cursor = 0;
            // positions of level n-1 paths: for n-1 == 1, position = id
            const std::vector<uint32_t>* prev_path = nullptr;
            for (uint64_t i = 0; i < list.size(); ++i) {
                const auto& path = list[i].first;
                check(path.size() == n, "trie: bad gram length");
                for (uint32_t w : path) check(w < v, "trie: gram id exceeds vocabulary");
                if (prev_path)
                    check(std::lexicographical_compare(prev_path->begin(), prev_path->end(),
                                                       path.begin(), path.end()),
                          "trie: gram stream is not sorted or has duplicates");
                prev_path = &path;
                // locate the parent path (all words but the last)
                auto is_parent = [&](const std::vector<uint32_t>& cand) {
                    return cand.size() + 1 == path.size() &&
                           std::equal(cand.begin(), cand.end(), path.begin());
                };
                uint64_t parent_pos;
                if (n == 2) {
                    parent_pos = path[0];
                } else {
                    while (parent_cursor < parents.size() &&
                           std::lexicographical_compare(
                               parents[parent_cursor].first.begin(),
                               parents[parent_cursor].first.end(), path.begin(),
                               path.end() - 1))
                        ++parent_cursor;
                    check(parent_cursor < parents.size() &&
                              is_parent(parents[parent_cursor].first),
                          "trie: missing parent context for a gram at level " +
                              std::to_string(n));
                    parent_pos = parent_cursor;
                }
                check(parent_pos < raw.range_len[n - 1].size(),
                      "trie: missing parent context");
                ++raw.range_len[n - 1][parent_pos];
                raw.ids[n].push_back(path.back());
                raw.counts[n].push_back(list[i].second);
            }
            if (n < order) raw.range_len[n].assign(list.size(), 0);
        }
        trie_config cc = cfg;
        cc.payload = trie_payload::counts;
        return from_levels(std::move(vocab), std::move(raw), cc);
    }

    // ---- queries ----

    // path in storage direction (already reversed for reversed tries)
    std::optional<payload_result> lookup_path(std::span<const uint32_t> path) const {
        uint8_t n = static_cast<uint8_t>(path.size());
        if (n == 0 || n > m_order) return std::nullopt;
        std::vector<uint64_t> targets(path.begin(), path.end());
        if (m_cfg.remap_k > 0) {
            for (uint8_t i = m_cfg.remap_k + 2; i <= n; ++i) {
                auto hit = walk(path.subspan(i - m_cfg.remap_k - 1, m_cfg.remap_k + 1),
                                nullptr, nullptr);
                if (!hit) return std::nullopt;  // mid-remap miss: gram cannot be stored
                targets[i - 1] = hit->pos - hit->range_begin;
            }
        }
        auto hit = walk_targets(targets, nullptr, nullptr);
        if (!hit) return std::nullopt;
        return payload(n, hit->pos);
    }

    std::optional<payload_result> lookup(std::vector<uint32_t> word_ids) const {
        if (m_cfg.direction == trie_direction::reversed)
            std::reverse(word_ids.begin(), word_ids.end());
        return lookup_path(word_ids);
    }

    std::optional<payload_result> lookup_tokens(
        const std::vector<std::string_view>& tokens) const {
        std::vector<uint32_t> ids(tokens.size());
        for (uint64_t i = 0; i < tokens.size(); ++i) {
            auto id = m_vocab.lookup(tokens[i]);
            if (!id) return std::nullopt;
            ids[i] = *id;
        }
        return lookup(std::move(ids));
    }

    payload_result payload(uint8_t n, uint64_t pos) const {
        const level& lv = m_levels[n];
        payload_result res;
        res.order = n;
        if (m_cfg.payload == trie_payload::counts) {
            uint64_t idx;
            if (m_cfg.counts_as_pef) {
                uint64_t s = lv.count_pef.access(pos);
                uint64_t p = pos ? lv.count_pef.access(pos - 1) : 0;
                idx = s - p - 1;
            } else {
                idx = lv.count_codes.access(pos);
            }
            res.count = lv.count_values.value(idx);
        } else if (n == 1) {
            res.prob = lv.raw_probs[pos];
            if (m_order > 1) res.backoff = lv.raw_backoffs[pos];
        } else {
            res.prob = lv.prob_quant.value(static_cast<uint32_t>(
                lv.prob_bits.get_bits(pos * m_cfg.quant_bits, m_cfg.quant_bits)));
            if (n < m_order)
                res.backoff = lv.backoff_quant.value(static_cast<uint32_t>(
                    lv.backoff_bits.get_bits(pos * m_cfg.quant_bits, m_cfg.quant_bits)));
        }
        return res;
    }

    struct walk_hit {
        uint64_t pos;          // position at the deepest walked level
        uint64_t range_begin;  // start of the sibling range at that level
    };

    // walks levels 1..path.size() matching raw (unmapped) ids; only valid
    // within the mapper levels when remapping is enabled
    std::optional<walk_hit> walk(std::span<const uint32_t> path,
                                 std::vector<uint64_t>* positions,
                                 std::vector<uint64_t>* range_begins) const {
        std::vector<uint64_t> targets(path.begin(), path.end());
        return walk_targets(targets, positions, range_begins);
    }

    std::optional<walk_hit> walk_targets(const std::vector<uint64_t>& targets,
                                         std::vector<uint64_t>* positions,
                                         std::vector<uint64_t>* range_begins) const {
        if (targets.empty() || targets[0] >= m_levels[1].entries) return std::nullopt;
        uint64_t pos = targets[0], begin = 0;
        if (positions) positions->push_back(pos);
        if (range_begins) range_begins->push_back(0);
        for (uint8_t j = 2; j <= targets.size(); ++j) {
            uint64_t b = m_levels[j - 1].pointers.access(pos);
            uint64_t e = m_levels[j - 1].pointers.access(pos + 1);
            if (b == e) return std::nullopt;
            uint64_t base = b ? m_levels[j].ids.access(b - 1) : 0;
            auto found = m_levels[j].ids.find(b, e, targets[j - 1] + base);
            if (!found) return std::nullopt;
            pos = *found;
            begin = b;
            if (positions) positions->push_back(pos);
            if (range_begins) range_begins->push_back(b);
        }
        return walk_hit{pos, begin};
    }

    // ---- metadata ----

    uint8_t order() const { return m_order; }
    const trie_config& config() const { return m_cfg; }
    const vocabulary& vocab() const { return m_vocab; }
    uint64_t level_size(uint8_t n) const { return m_levels[n].entries; }
    const level& level_at(uint8_t n) const { return m_levels[n]; }

    trie_stats stats() const {
        trie_stats s;
        s.levels.resize(m_order + 1);
        for (uint8_t n = 1; n <= m_order; ++n) {
            auto& ls = s.levels[n];
            const level& lv = m_levels[n];
            ls.entries = lv.entries;
            if (n >= 2) ls.id_bits = lv.ids.payload_bits();
            if (n < m_order) ls.pointer_bits = lv.pointers.payload_bits();
            if (m_cfg.payload == trie_payload::counts) {
                ls.payload_bits = m_cfg.counts_as_pef ? lv.count_pef.payload_bits()
                                                      : lv.count_codes.payload_bits();
                ls.payload_bits += lv.count_values.size() * 64;
            } else if (n == 1) {
                ls.payload_bits = (lv.raw_probs.size() + lv.raw_backoffs.size()) * 32;
            } else {
                ls.payload_bits = lv.prob_bits.size() + lv.backoff_bits.size() +
                                  (lv.prob_quant.codebook_size() +
                                   lv.backoff_quant.codebook_size()) * 32;
            }
            s.total_entries += ls.entries;
            s.total_id_bits += ls.id_bits;
            s.total_bits += ls.id_bits + ls.pointer_bits + ls.payload_bits;
        }
        return s;
    }

    // ---- serialization ----

    void save(std::ostream& out) const {
        write_magic(out, "TRIE", 1);
        write_pod<uint8_t>(out, m_order);
        write_pod<uint8_t>(out, m_cfg.remap_k);
        write_pod<uint8_t>(out, static_cast<uint8_t>(m_cfg.direction));
        write_pod<uint8_t>(out, static_cast<uint8_t>(m_cfg.payload));
        write_pod<uint8_t>(out, m_cfg.quant_bits);
        write_pod<uint32_t>(out, m_cfg.block_size_l2);
        write_pod<uint32_t>(out, m_cfg.block_size_rest);
        write_pod<uint8_t>(out, m_cfg.counts_as_pef ? 1 : 0);
        m_vocab.save(out);
        for (uint8_t n = 1; n <= m_order; ++n) {
            const level& lv = m_levels[n];
            write_pod<uint64_t>(out, lv.entries);
            if (n >= 2) lv.ids.save(out);
            if (n < m_order) lv.pointers.save(out);
            if (m_cfg.payload == trie_payload::counts) {
                if (m_cfg.counts_as_pef)
                    lv.count_pef.save(out);
                else
                    lv.count_codes.save(out);
                lv.count_values.save(out);
            } else if (n == 1) {
                write_vec(out, lv.raw_probs);
                write_vec(out, lv.raw_backoffs);
            } else {
                lv.prob_quant.save(out);
                lv.prob_bits.save(out);
                if (n < m_order) {
                    lv.backoff_quant.save(out);
                    lv.backoff_bits.save(out);
                }
            }
        }
    }

    void load(std::istream& in) {
        read_magic(in, "TRIE");
        m_order = read_pod<uint8_t>(in);
        m_cfg.remap_k = read_pod<uint8_t>(in);
        m_cfg.direction = static_cast<trie_direction>(read_pod<uint8_t>(in));
        m_cfg.payload = static_cast<trie_payload>(read_pod<uint8_t>(in));
        m_cfg.quant_bits = read_pod<uint8_t>(in);
        m_cfg.block_size_l2 = read_pod<uint32_t>(in);
        m_cfg.block_size_rest = read_pod<uint32_t>(in);
        m_cfg.counts_as_pef = read_pod<uint8_t>(in) != 0;
        m_vocab.load(in);
        m_levels.assign(m_order + 1, {});
        for (uint8_t n = 1; n <= m_order; ++n) {
            level& lv = m_levels[n];
            lv.entries = read_pod<uint64_t>(in);
            if (n >= 2) lv.ids.load(in);
            if (n < m_order) lv.pointers.load(in);
            if (m_cfg.payload == trie_payload::counts) {
                if (m_cfg.counts_as_pef)
                    lv.count_pef.load(in);
                else
                    lv.count_codes.load(in);
                lv.count_values.load(in);
            } else if (n == 1) {
                lv.raw_probs = read_vec<float>(in);
                lv.raw_backoffs = read_vec<float>(in);
            } else {
                lv.prob_quant.load(in);
                lv.prob_bits.load(in);
                if (n < m_order) {
                    lv.backoff_quant.load(in);
                    lv.backoff_bits.load(in);
                }
            }
        }
    }

  private:
    static bit_vector pack(const std::vector<uint32_t>& values, uint8_t width) {
        bit_vector_builder b;
        for (uint32_t v : values) b.append_bits(v, width);
        return bit_vector(std::move(b));
    }

    // Rewrite ids of levels above k+1 to positions among the followers of
    // their length-k context, found by searching the (still unmapped) first
    // k+1 levels. Requires every length-(k+1) sub-path to be present.
    static void apply_remapping(trie_raw_levels& raw, uint8_t k) {
        std::vector<std::vector<uint64_t>> off(raw.order + 1);
        for (uint8_t n = 1; n < raw.order; ++n) off[n] = raw.offsets(n);

        // binary search of a raw id inside a sibling range of level j
        auto find_in_range = [&](uint8_t j, uint64_t b, uint64_t e,
                                 uint32_t target) -> std::optional<uint64_t> {
            const auto& ids = raw.ids[j];
            auto it = std::lower_bound(ids.begin() + b, ids.begin() + e, target);
            if (it != ids.begin() + e && *it == target)
                return static_cast<uint64_t>(it - ids.begin());
            return std::nullopt;
        };
        auto mapper_search = [&](const uint32_t* path) -> std::optional<uint64_t> {
            // walk levels 1..k+1; returns position relative to the last range
            uint64_t pos = path[0];
            if (pos >= off[1].size() - 1) return std::nullopt;
            uint64_t begin = 0;
            for (uint8_t j = 2; j <= k + 1; ++j) {
                uint64_t b = off[j - 1][pos], e = off[j - 1][pos + 1];
                auto found = find_in_range(j, b, e, path[j - 1]);
                if (!found) return std::nullopt;
                pos = *found;
                begin = b;
            }
            return pos - begin;
        };

        std::vector<std::vector<uint32_t>> remapped(raw.order + 1);
        for (uint8_t n = k + 2; n <= raw.order; ++n)
            remapped[n].resize(raw.ids[n].size());

        // depth-first walk to know each entry's full path
        std::vector<uint32_t> path(raw.order);
        auto visit = [&](auto&& self, uint8_t j, uint64_t b, uint64_t e) -> void {
            for (uint64_t p = b; p < e; ++p) {
                path[j - 1] = raw.ids[j][p];
                if (j >= k + 2) {
                    auto rem = mapper_search(path.data() + j - k - 1);
                    check(rem.has_value(),
                          "trie: remapping needs a closed gram set (missing length-" +
                              std::to_string(k + 1) + " sub-path)");
                    remapped[j][p] = static_cast<uint32_t>(*rem);
                }
                if (j < raw.order) self(self, j + 1, off[j][p], off[j][p + 1]);
            }
        };
        uint64_t v = off[1].size() - 1;
        for (uint64_t w = 0; w < v; ++w) {
            path[0] = static_cast<uint32_t>(w);
            if (raw.order >= 2) visit(visit, 2, off[1][w], off[1][w + 1]);
        }
        for (uint8_t n = k + 2; n <= raw.order; ++n) raw.ids[n] = std::move(remapped[n]);
    }

    uint8_t m_order = 0;
    trie_config m_cfg;
    vocabulary m_vocab;
    std::vector<level> m_levels;
};

}  // namespace ngram
