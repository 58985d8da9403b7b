#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <map>
#include <random>

#include "ngram/block_file.hpp"
#include "ngram/merge.hpp"
#include "ngram/sort.hpp"

using namespace ngram;
namespace fs = std::filesystem;

namespace {

std::vector<ngram_record> random_records(std::mt19937_64& rng, uint64_t n, uint8_t order,
                                         uint32_t vocab) {
    std::vector<ngram_record> recs(n);
    for (auto& r : recs) {
        for (uint8_t k = 0; k < order; ++k) {
            // skewed ids so shared prefixes actually occur
            uint32_t v = static_cast<uint32_t>(rng() % vocab);
            r.words[k] = std::min(v, static_cast<uint32_t>(rng() % vocab));
        }
        r.count = 1 + rng() % 1000;
    }
    return recs;
}

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("radix sort equals serial reference") {
    std::mt19937_64 rng(1);
    for (uint8_t order : {1, 2, 3, 5, 8}) {
        for (uint64_t n : {0ull, 1ull, 17ull, 5000ull}) {
            uint32_t vocab = 50;
            auto recs = random_records(rng, n, order, vocab);
            auto expect = recs;
            sort_context_order_serial(expect, order);
            auto got = recs;
            sort_context_order(got, order, vocab, 4);
            REQUIRE(got.size() == expect.size());
            for (uint64_t i = 0; i < n; ++i) {
                CHECK(got[i].same_words(expect[i], order));
                CHECK(got[i].count == expect[i].count);
            }

            // suffix order too
            expect = recs;
            sort_suffix_order_serial(expect, order);
            got = recs;
            sort_suffix_order(got, order, vocab, 3);
            for (uint64_t i = 0; i < n; ++i) CHECK(got[i].same_words(expect[i], order));
        }
    }
}

TEST_CASE("context-sorted plus one last-word pass equals suffix sort") {
    std::mt19937_64 rng(2);
    uint8_t order = 5;
    uint32_t vocab = 30;
    auto recs = random_records(rng, 4000, order, vocab);
    auto suffix = recs;
    sort_suffix_order_serial(suffix, order);
    sort_context_order(recs, order, vocab, 2);
    last_word_pass(recs, order, vocab);
    for (uint64_t i = 0; i < recs.size(); ++i) CHECK(recs[i].same_words(suffix[i], order));
}

TEST_CASE("block file round trip in all encodings") {
    std::mt19937_64 rng(3);
    for (auto enc : {block_encoding::raw, block_encoding::fc_byte, block_encoding::fc_bit}) {
        for (uint8_t order : {1, 3, 5}) {
            uint32_t vocab = 100;
            auto recs = random_records(rng, 3000, order, vocab);
            sort_context_order(recs, order, vocab);
            std::string path = tmp_path("blk_rt.bin");
            block_header h;
            h.order = order;
            h.encoding = enc;
            h.window_bytes = 1 << 10;  // force many windows
            h.ordering = block_ordering::context;
            {
                block_writer w(path, h);
                for (const auto& r : recs) w.write(r);
                w.close();
            }
            block_reader r(path);
            CHECK(r.header().records == recs.size());
            ngram_record rec;
            for (uint64_t i = 0; i < recs.size(); ++i) {
                REQUIRE(r.next(rec));
                CHECK(rec.same_words(recs[i], order));
                CHECK(rec.count == recs[i].count);
            }
            CHECK(!r.next(rec));
            fs::remove(path);
        }
    }
}

TEST_CASE("front coding compresses sorted skewed blocks") {
    std::mt19937_64 rng(4);
    uint8_t order = 5;
    uint32_t vocab = 20;  // few distinct ids -> long shared prefixes
    auto recs = random_records(rng, 20000, order, vocab);
    sort_context_order(recs, order, vocab);
    uint64_t raw_size, fc_size;
    for (auto enc : {block_encoding::raw, block_encoding::fc_byte}) {
        std::string path = tmp_path("blk_fc.bin");
        block_header h;
        h.order = order;
        h.encoding = enc;
        h.ordering = block_ordering::context;
        block_writer w(path, h);
        for (const auto& r : recs) w.write(r);
        w.close();
        (enc == block_encoding::raw ? raw_size : fc_size) = fs::file_size(path);
        fs::remove(path);
    }
    CHECK(fc_size * 2 < raw_size);
}

TEST_CASE("merge combines duplicates and counts one merge") {
    std::mt19937_64 rng(5);
    uint8_t order = 3;
    uint32_t vocab = 12;  // small vocab ensures duplicates across files
    io_stats().reset();
    std::map<std::vector<uint32_t>, uint64_t> oracle;
    std::vector<std::string> paths;
    for (int f = 0; f < 5; ++f) {
        auto recs = random_records(rng, 500, order, vocab);
        sort_context_order(recs, order, vocab);
        // combine duplicates within the file (writer expects distinct sorted grams)
        std::vector<ngram_record> dedup;
        for (const auto& r : recs) {
            if (!dedup.empty() && dedup.back().same_words(r, order))
                dedup.back().count += r.count;
            else
                dedup.push_back(r);
        }
        std::string path = tmp_path("blk_merge_" + std::to_string(f) + ".bin");
        paths.push_back(path);
        block_header h;
        h.order = order;
        h.encoding = block_encoding::fc_byte;
        h.ordering = block_ordering::context;
        block_writer w(path, h);
        for (const auto& r : dedup) {
            w.write(r);
            std::vector<uint32_t> key(r.words.begin(), r.words.begin() + order);
            oracle[key] += r.count;
        }
        w.close();
    }
    std::string out = tmp_path("blk_merged.bin");
    merge_block_files(paths, out);
    CHECK(io_stats().merges == 1);

    block_reader r(out);
    ngram_record rec, prev;
    uint64_t seen = 0;
    context_order_less less{order};
    while (r.next(rec)) {
        std::vector<uint32_t> key(rec.words.begin(), rec.words.begin() + order);
        REQUIRE(oracle.count(key));
        CHECK(oracle[key] == rec.count);
        if (seen) CHECK(less(prev, rec));  // strictly increasing: duplicates combined
        prev = rec;
        ++seen;
    }
    CHECK(seen == oracle.size());
    for (const auto& p : paths) fs::remove(p);
    fs::remove(out);
}

TEST_CASE("merge respects the fan-in cap hierarchically") {
    uint8_t order = 2;
    std::vector<std::string> paths;
    std::map<std::vector<uint32_t>, uint64_t> oracle;
    for (uint32_t f = 0; f < 9; ++f) {
        std::string path = tmp_path("blk_fan_" + std::to_string(f) + ".bin");
        paths.push_back(path);
        block_header h;
        h.order = order;
        h.ordering = block_ordering::context;
        block_writer w(path, h);
        ngram_record r;
        r.words[0] = f % 3;
        r.words[1] = f;
        r.count = f + 1;
        w.write(r);
        oracle[{r.words[0], r.words[1]}] += r.count;
        w.close();
    }
    io_stats().reset();
    std::string out = tmp_path("blk_fan_out.bin");
    merge_options opt;
    opt.fan_in = 3;
    merge_block_files(paths, out, opt);
    CHECK(io_stats().merges == 4);  // three groups of three, then the final merge
    block_reader r(out);
    ngram_record rec;
    uint64_t seen = 0;
    while (r.next(rec)) {
        CHECK(oracle[{rec.words[0], rec.words[1]}] == rec.count);
        ++seen;
    }
    CHECK(seen == oracle.size());
    for (const auto& p : paths) fs::remove(p);
    fs::remove(out);
}

TEST_CASE("merge rejects out-of-order input") {
    uint8_t order = 2;
    std::string path = tmp_path("blk_bad.bin");
    block_header h;
    h.order = order;
    h.ordering = block_ordering::context;
    {
        block_writer w(path, h);
        ngram_record a, b;
        a.words = {5, 5};
        b.words = {1, 1};
        a.count = b.count = 1;
        w.write(a);
        w.write(b);
        w.close();
    }
    std::string out = tmp_path("blk_bad_out.bin");
    CHECK_THROWS_AS(merge_block_files({path}, out), error);
    fs::remove(path);
    fs::remove(out);
}
