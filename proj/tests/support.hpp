// Shared test utilities: synthetic corpora, the brute-force smoothing
// reference estimator, and the stateless scoring oracle.
#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ngram/scoring.hpp"
#include "ngram/smoothing.hpp"
#include "ngram/trie_index.hpp"
#include "ngram/vocabulary.hpp"

namespace testsupport {

inline std::string make_tmp_dir(const std::string& name) {
    auto d = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(d);
    return d.string();
}

// Zipf-like draw: a long tail of rare words keeps every t_{n,k} statistic
// populated (words with exactly 1..4 distinct left extensions must exist)
inline std::vector<std::vector<std::string>> random_sentences(std::mt19937_64& rng,
                                                              uint64_t count,
                                                              uint32_t vocab,
                                                              uint64_t len) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<std::vector<std::string>> out(count);
    for (auto& s : out) {
        s.resize(len);
        for (auto& w : s) {
            auto id = static_cast<uint32_t>(double(vocab) * std::pow(uni(rng), 8.0));
            w = "w" + std::to_string(std::min(id, vocab - 1));
        }
    }
    return out;
}

inline std::string write_corpus(const std::vector<std::vector<std::string>>& sentences,
                                const std::string& path) {
    std::ofstream out(path);
    for (const auto& s : sentences) {
        for (uint64_t i = 0; i < s.size(); ++i) out << (i ? " " : "") << s[i];
        out << "\n";
    }
    return path;
}

// Brute-force modified Kneser-Ney estimator from hash-map counts, used as
// the oracle for the streaming pipeline.
struct reference_model {
    uint8_t order;
    const ngram::vocabulary& vocab;
    std::vector<std::map<std::vector<uint32_t>, uint64_t>> a;  // modified counts
    std::map<std::vector<uint32_t>, double> prob;              // text-order gram
    std::map<std::vector<uint32_t>, double> backoff;
    ngram::discounts disc;
    uint64_t m2 = 0;
    double b_eps = 0;
    std::vector<double> p1;

    reference_model(const std::vector<std::vector<std::string>>& sentences,
                    const ngram::vocabulary& v, uint8_t n)
        : order(n), vocab(v) {
        uint32_t V = vocab.size();
        a.assign(n + 1, {});
        std::vector<std::map<std::vector<uint32_t>, std::set<uint32_t>>> lefts(n);
        for (const auto& s : sentences) {
            std::vector<uint32_t> ids;
            for (const auto& t : s) ids.push_back(*vocab.lookup(t));
            if (ids.size() < n) continue;
            for (uint64_t i = 0; i + n <= ids.size(); ++i) {
                std::vector<uint32_t> g(ids.begin() + i, ids.begin() + i + n);
                ++a[n][g];
                for (uint8_t m = 1; m < n; ++m) {
                    std::vector<uint32_t> suf(g.end() - m, g.end());
                    lefts[m][suf].insert(g[n - m - 1]);
                }
            }
        }
        for (uint8_t m = 1; m < n; ++m)
            for (const auto& [g, set] : lefts[m]) a[m][g] = set.size();

        ngram::smoothing_stats sm;
        sm.init(n);
        for (uint8_t m = 1; m <= n; ++m)
            for (const auto& [g, k] : a[m])
                if (k <= 4) ++sm.t[m][k];
        disc = ngram::discounts::compute(sm);

        for (const auto& [g, k] : a[1]) m2 += k;
        double n1 = double(sm.t[1][1]), n2 = double(sm.t[1][2]);
        double n3p = double(a[1].size()) - n1 - n2;
        b_eps = (disc.d[1][1] * n1 + disc.d[1][2] * n2 + disc.d[1][3] * n3p) / double(m2);

        p1.assign(V, b_eps / V);
        for (const auto& [g, k] : a[1]) {
            p1[g[0]] = (double(k) - disc(1, k)) / double(m2) + b_eps / V;
            prob[g] = p1[g[0]];
        }
        for (uint8_t m = 2; m <= n; ++m) {
            // group by context; within a context compute d and the backoff
            std::map<std::vector<uint32_t>, std::vector<std::vector<uint32_t>>> by_ctx;
            for (const auto& [g, k] : a[m])
                by_ctx[std::vector<uint32_t>(g.begin(), g.end() - 1)].push_back(g);
            for (const auto& [ctx, grams] : by_ctx) {
                double d = 0, bn = 0;
                for (const auto& g : grams) {
                    d += double(a[m][g]);
                    bn += disc(m, a[m][g]);
                }
                for (const auto& g : grams) {
                    uint64_t k = a[m][g];
                    std::vector<uint32_t> suf(g.begin() + 1, g.end());
                    double lower = m == 2 ? p1[g[1]] : prob.at(suf);
                    prob[g] = (double(k) - disc(m, k)) / d + (bn / d) * lower;
                }
                // the context's backoff weight; kept only for stored contexts
                if (a[m - 1].count(ctx)) backoff[ctx] = bn / d;
            }
        }
    }
};

// Stateless per-position recursion, summing the same factors in the same
// order as the stateful scorer so results must agree bit for bit. A stored
// gram is used even when its own context chain is unstored (possible near
// line starts), so the gram search is bounded by the history, not by the
// stored context chain.
inline double oracle_log10(const ngram::trie_index& t, const std::vector<uint32_t>& hist,
                           uint32_t y) {
    int N = t.order();
    int m = 0;  // longest stored context chain from the history
    while (m < int(hist.size()) && m < N - 1) {
        std::vector<uint32_t> ctx(hist.end() - (m + 1), hist.end());
        if (!t.lookup(ctx)) break;
        ++m;
    }
    int L = 1;
    double p = std::log10(double(t.lookup({y})->prob));
    for (int len = 2; len <= int(hist.size()) + 1 && len <= N; ++len) {
        std::vector<uint32_t> g(hist.end() - (len - 1), hist.end());
        g.push_back(y);
        auto r = t.lookup(g);
        if (!r) break;
        L = len;
        p = std::log10(double(r->prob));
    }
    for (int c = L; c <= m; ++c) {
        std::vector<uint32_t> ctx(hist.end() - c, hist.end());
        p += std::log10(double(t.lookup(ctx)->backoff));
    }
    return p;
}

}  // namespace testsupport
