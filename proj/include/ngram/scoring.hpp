#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common.hpp"
#include "trie_index.hpp"

namespace ngram {

// Context carried from one scored word to the next. The raw history (up to
// order-1 words) drives the longest-match walk: near line starts a gram can
// be stored even though its own context chain is not, so truncating the
// history to the matched path would lose matches. The stored context chain
// (always a contiguous prefix, by the trie's prefix closure) is tracked
// separately with its trie positions so backoff weights can be read
// directly.
struct scorer_state {
    uint8_t len = 0;                            // raw context words available
    uint8_t ctx_len = 0;                        // stored context chain length
    std::array<uint32_t, max_order> words{};    // most recent first
    std::array<uint64_t, max_order + 1> pos{};  // pos[t]: level-t position of
                                                // the length-t context path
    void clear() { len = ctx_len = 0; }
};

struct word_score {
    double log10_prob = 0.0;
    bool oov = false;
};

// Left-to-right scorer over a reversed trie with probability/backoff
// payloads. Each word is scored with the longest stored gram ending at it;
// for every longer stored context whose extension is absent, the context's
// backoff weight multiplies in (the standard backoff recursion).
struct scorer {
    explicit scorer(const trie_index& index) : m_idx(&index) {
        check(index.config().payload == trie_payload::prob_backoff &&
                  index.config().direction == trie_direction::reversed,
              "scorer: the index must be a reversed probability trie");
    }

    word_score score_id(scorer_state& state, uint32_t wid) const {
        const trie_index& idx = *m_idx;
        uint8_t order = idx.order();
        uint8_t k = idx.config().remap_k;

        // storage path of the candidate longest gram: word, then context
        std::array<uint32_t, max_order> path{};
        path[0] = wid;
        for (uint8_t t = 0; t < state.len; ++t) path[t + 1] = state.words[t];

        std::array<uint64_t, max_order + 1> npos{};
        uint64_t cur = wid;
        npos[1] = cur;
        uint8_t matched = 1;
        for (uint8_t t = 1; t <= state.len && t + 1 <= order; ++t) {
            uint8_t j = t + 1;  // level being entered
            uint64_t target = path[t];
            if (k > 0 && j > k + 1) {
                auto hit = idx.walk(std::span<const uint32_t>(path.data() + j - k - 1,
                                                              k + 1),
                                    nullptr, nullptr);
                if (!hit) break;
                target = hit->pos - hit->range_begin;
            }
            const auto& parent = idx.level_at(t);
            uint64_t b = parent.pointers.access(cur);
            uint64_t e = parent.pointers.access(cur + 1);
            if (b == e) break;
            const auto& lv = idx.level_at(j);
            uint64_t base = b ? lv.ids.access(b - 1) : 0;
            auto found = lv.ids.find(b, e, target + base);
            if (!found) break;
            cur = *found;
            matched = j;
            npos[j] = cur;
        }

        word_score ws;
        ws.log10_prob = std::log10(double(idx.payload(matched, npos[matched]).prob));
        // back off through every stored context longer than the match;
        // contexts beyond the stored chain have implicit weight 1
        for (uint8_t t = matched; t <= state.ctx_len; ++t)
            ws.log10_prob +=
                std::log10(double(idx.payload(t, state.pos[t]).backoff));

        state.len = std::min<uint8_t>(state.len + 1, order - 1);
        state.ctx_len = std::min<uint8_t>(matched, order - 1);
        for (uint8_t t = 0; t < state.len; ++t) state.words[t] = path[t];
        for (uint8_t t = 1; t <= state.ctx_len; ++t) state.pos[t] = npos[t];
        return ws;
    }

    word_score score_word(scorer_state& state, std::string_view token) const {
        auto id = m_idx->vocab().lookup(token);
        word_score ws = score_id(state, id ? *id : m_idx->vocab().unk_id());
        ws.oov = !id.has_value();
        return ws;
    }

    const trie_index* m_idx;
};

struct perplexity_result {
    double perplexity = 0.0;
    uint64_t words = 0;  // scored positions M
    uint64_t oov = 0;
    double log10_sum = 0.0;
};

// Perplexity over a text stream, one sentence per line; the scorer state
// resets at line starts. With skip_oov, out-of-vocabulary positions are
// excluded from both the sum and M (they are still counted as OOV).
inline perplexity_result perplexity(const trie_index& index, std::istream& in,
                                    bool skip_oov = false) {
    scorer sc(index);
    scorer_state state;
    perplexity_result res;
    std::string line, token;
    while (std::getline(in, line)) {
        state.clear();
        uint64_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
                ++i;
            uint64_t b = i;
            while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])))
                ++i;
            if (i == b) continue;
            auto ws = sc.score_word(state, std::string_view(line).substr(b, i - b));
            if (ws.oov) ++res.oov;
            if (ws.oov && skip_oov) continue;
            res.log10_sum += ws.log10_prob;
            ++res.words;
        }
    }
    check(res.words > 0, "perplexity: no scorable words in the input");
    res.perplexity = std::pow(10.0, -res.log10_sum / double(res.words));
    return res;
}

}  // namespace ngram
