#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ngram/estimate.hpp"
#include "ngram/scoring.hpp"
#include "support.hpp"

using namespace ngram;
namespace fs = std::filesystem;
using testsupport::oracle_log10;

namespace {

std::string tmp_dir() { return testsupport::make_tmp_dir("score_tests"); }

std::vector<std::vector<std::string>> zipf_sentences(std::mt19937_64& rng, uint64_t count,
                                                     uint32_t vocab, uint64_t len) {
    return testsupport::random_sentences(rng, count, vocab, len);
}

std::string write_corpus(const std::vector<std::vector<std::string>>& sentences,
                         const std::string& name) {
    return testsupport::write_corpus(sentences, tmp_dir() + "/" + name);
}

trie_index train(std::mt19937_64& rng, uint8_t order, const std::string& name,
                 uint8_t quant_bits = 8) {
    auto sentences = zipf_sentences(rng, 1500, 3000, 10);
    std::string path = write_corpus(sentences, name);
    estimate_config cfg;
    cfg.order = order;
    cfg.tmp_dir = tmp_dir();
    cfg.quant_bits = quant_bits;
    return estimate(path, cfg);
}

trie_index uniform_model(uint32_t words) {
    std::vector<std::pair<std::string, uint64_t>> items;
    for (uint32_t i = 0; i < words; ++i) items.emplace_back("u" + std::to_string(i), 1);
    auto vocab = vocabulary::build(std::move(items));
    trie_raw_levels raw;
    raw.resize(1);
    raw.probs[1].assign(vocab.size(), 1.0f / float(vocab.size()));
    trie_config cfg;
    cfg.payload = trie_payload::prob_backoff;
    cfg.direction = trie_direction::reversed;
    return trie_index::from_levels(std::move(vocab), std::move(raw), cfg);
}

}  // namespace

TEST_CASE("stateful scoring equals the stateless recursion bit for bit") {
    std::mt19937_64 rng(51);
    for (uint8_t order : {2, 3, 5}) {
        auto trie = train(rng, order, "sc_" + std::to_string(order) + ".txt");
        scorer sc(trie);
        uint32_t v = trie.vocab().size();
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (int line = 0; line < 200; ++line) {
            scorer_state state;
            std::vector<uint32_t> hist;
            for (int i = 0; i < 12; ++i) {
                // mix common, rare, and unknown-mapped words
                auto id = static_cast<uint32_t>(double(v) * std::pow(uni(rng), 4.0));
                id = std::min(id, v - 1);
                double want = oracle_log10(trie, hist, id);
                auto got = sc.score_id(state, id);
                CHECK(got.log10_prob == want);
                CHECK(std::isfinite(got.log10_prob));
                CHECK(got.log10_prob <= 0.0);
                hist.push_back(id);
            }
        }
    }
}

TEST_CASE("scoring agrees across remapped and plain models") {
    std::mt19937_64 rng(53);
    // remapping needs every length-(k+1) sub-path of a stored path to be a
    // stored gram; only grams whose sole occurrences open a line can break
    // that, so join everything into one line and repeat its opening sentence
    auto sentences = zipf_sentences(rng, 1500, 3000, 10);
    std::vector<std::string> line;
    for (const auto& s : sentences) line.insert(line.end(), s.begin(), s.end());
    line.insert(line.end(), sentences[0].begin(), sentences[0].end());
    std::string path = write_corpus({line}, "remap.txt");
    std::vector<double> sums;
    for (uint8_t k : {0, 1}) {
        estimate_config cfg;
        cfg.order = 3;
        cfg.tmp_dir = tmp_dir();
        cfg.remap_k = k;
        auto trie = estimate(path, cfg);
        std::ifstream in(path);
        auto res = perplexity(trie, in);
        sums.push_back(res.log10_sum);
        CHECK(res.oov == 0);
    }
    CHECK(sums[0] == sums[1]);
}

TEST_CASE("normalization: conditional distributions sum to one") {
    std::mt19937_64 rng(59);
    for (uint8_t order : {2, 3}) {
        auto trie = train(rng, order, "norm_" + std::to_string(order) + ".txt", 32);
        scorer sc(trie);
        uint32_t v = trie.vocab().size();
        std::uniform_int_distribution<uint32_t> pick(0, v - 1);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<uint32_t> hist;
            for (uint8_t i = 0; i + 1 < order; ++i) hist.push_back(pick(rng));
            double sum = 0;
            for (uint32_t y = 0; y < v; ++y) {
                scorer_state state;
                for (uint32_t h : hist) sc.score_id(state, h);
                sum += std::pow(10.0, sc.score_id(state, y).log10_prob);
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("uniform unigram model: perplexity equals the vocabulary size") {
    auto trie = uniform_model(99);  // 100 with the unknown-word slot
    uint32_t v = trie.vocab().size();
    std::stringstream corpus;
    corpus << "u1 u2 u3 u4\nu5 u6 u7\n";
    auto res = perplexity(trie, corpus);
    CHECK(res.words == 7);
    CHECK(res.oov == 0);
    CHECK(res.perplexity == doctest::Approx(double(v)).epsilon(1e-6));
}

TEST_CASE("oov words map to unk and are counted") {
    std::mt19937_64 rng(61);
    auto trie = train(rng, 3, "oov.txt");
    std::stringstream corpus;
    corpus << "w0 never-seen-token w1\n";
    auto res = perplexity(trie, corpus);
    CHECK(res.words == 3);
    CHECK(res.oov == 1);
    CHECK(std::isfinite(res.perplexity));

    std::stringstream corpus2;
    corpus2 << "w0 never-seen-token w1\n";
    auto skipped = perplexity(trie, corpus2, true);
    CHECK(skipped.words == 2);
    CHECK(skipped.oov == 1);

    std::stringstream empty;
    CHECK_THROWS_AS(perplexity(trie, empty), error);
}

TEST_CASE("state resets per line") {
    std::mt19937_64 rng(67);
    auto trie = train(rng, 3, "lines.txt");
    std::stringstream two_lines("w0 w1\nw2 w3\n");
    auto joint = perplexity(trie, two_lines);
    std::stringstream a("w0 w1\n"), b("w2 w3\n");
    auto pa = perplexity(trie, a), pb = perplexity(trie, b);
    CHECK(joint.log10_sum == doctest::Approx(pa.log10_sum + pb.log10_sum).epsilon(1e-12));
}
