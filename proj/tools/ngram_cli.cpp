// Command-line front end: counting, model estimation, index construction,
// lookups, perplexity evaluation and index size reporting.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ngram/counting.hpp"
#include "ngram/estimate.hpp"
#include "ngram/hash_index.hpp"
#include "ngram/scoring.hpp"
#include "ngram/trie_index.hpp"

using json = nlohmann::json;
using namespace ngram;

namespace {

// human-readable byte sizes: plain number or K/M/G suffix
uint64_t parse_ram(const std::string& s) {
    check(!s.empty(), "--ram: empty value");
    uint64_t mult = 1;
    std::string digits = s;
    switch (std::toupper(static_cast<unsigned char>(s.back()))) {
        case 'K': mult = 1ull << 10; digits.pop_back(); break;
        case 'M': mult = 1ull << 20; digits.pop_back(); break;
        case 'G': mult = 1ull << 30; digits.pop_back(); break;
        default: break;
    }
    check(!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos,
          "--ram: cannot parse '" + s + "'");
    return std::stoull(digits) * mult;
}

std::string default_tmp() {
    const char* env = std::getenv("NGRAM_TMPDIR");
    return env ? env : ".";
}

block_encoding parse_fc(const std::string& s) {
    if (s == "off") return block_encoding::raw;
    if (s == "byte") return block_encoding::fc_byte;
    if (s == "bit") return block_encoding::fc_bit;
    throw CLI::ValidationError("--fc", "must be one of off, byte, bit");
}

// per-order "gram<TAB>count" text files -> id paths, sorted per order
std::pair<vocabulary, std::vector<trie_index::gram_list>> read_counts_files(
    const std::vector<std::string>& paths) {
    check(!paths.empty(), "no counts files given");
    check(paths.size() <= max_order, "too many counts files (order > 8)");

    auto parse_line = [](const std::string& line, const std::string& path,
                         std::vector<std::string>& tokens, uint64_t& count) {
        auto tab = line.find('\t');
        check(tab != std::string::npos && tab > 0,
              path + ": expected 'gram<TAB>count' in line '" + line + "'");
        tokens.clear();
        std::istringstream gram(line.substr(0, tab));
        std::string tok;
        while (gram >> tok) tokens.push_back(tok);
        check(!tokens.empty(), path + ": empty gram in line '" + line + "'");
        std::string cnt = line.substr(tab + 1);
        check(!cnt.empty() && cnt.find_first_not_of("0123456789") == std::string::npos,
              path + ": bad count in line '" + line + "'");
        count = std::stoull(cnt);
    };

    // the unigram file defines the vocabulary (occurrence = its count)
    std::vector<std::pair<std::string, uint64_t>> items;
    {
        std::ifstream in(paths[0]);
        check(in.good(), "cannot open " + paths[0]);
        std::string line;
        std::vector<std::string> tokens;
        uint64_t count;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            parse_line(line, paths[0], tokens, count);
            check(tokens.size() == 1, paths[0] + ": expected unigrams only");
            items.emplace_back(tokens[0], count);
        }
    }
    auto vocab = vocabulary::build(std::move(items));

    std::vector<trie_index::gram_list> grams(paths.size() + 1);
    for (uint64_t n = 1; n <= paths.size(); ++n) {
        std::ifstream in(paths[n - 1]);
        check(in.good(), "cannot open " + paths[n - 1]);
        std::string line;
        std::vector<std::string> tokens;
        uint64_t count;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            parse_line(line, paths[n - 1], tokens, count);
            check(tokens.size() == n, paths[n - 1] + ": expected order-" +
                                          std::to_string(n) + " grams, got '" + line + "'");
            std::vector<uint32_t> ids(n);
            for (uint64_t i = 0; i < n; ++i) {
                auto id = vocab.lookup(tokens[i]);
                check(id.has_value(),
                      paths[n - 1] + ": token '" + tokens[i] + "' is not in the unigram file");
                ids[i] = *id;
            }
            grams[n].emplace_back(std::move(ids), count);
        }
        std::sort(grams[n].begin(), grams[n].end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }
    return {std::move(vocab), std::move(grams)};
}

template <class Index>
void save_index(const Index& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    check(out.good(), "cannot open " + path + " for writing");
    index.save(out);
    check(out.good(), "write failed: " + path);
}

std::string sniff_magic(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "cannot open " + path);
    char tag[4] = {};
    in.read(tag, 4);
    check(in.good(), path + ": not an index file");
    return std::string(tag, 4);
}

trie_index load_trie(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check(in.good(), "cannot open " + path);
    trie_index t;
    t.load(in);
    return t;
}

std::vector<std::string_view> split_tokens(const std::string& line,
                                           std::vector<std::string>& storage) {
    storage.clear();
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) storage.push_back(std::move(tok));
    std::vector<std::string_view> views(storage.begin(), storage.end());
    return views;
}

int cmd_count(const std::string& corpus, counting_config cc) {
    auto res = counting_pass(corpus, cc);
    json out{{"tokens", res.tokens},
             {"windows", res.windows},
             {"flushes", res.flushes},
             {"vocabulary", res.vocab.size()},
             {"blocks", res.block_paths}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_estimate(const std::string& corpus, const estimate_config& cfg,
                 const std::string& output) {
    estimate_report rep;
    auto trie = estimate(corpus, cfg, &rep);
    save_index(trie, output);
    json out{{"tokens", rep.tokens},
             {"windows", rep.windows},
             {"flushes", rep.flushes},
             {"merges", rep.merges},
             {"vocabulary", rep.vocab_size},
             {"grams", rep.distinct},
             {"model", output}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_build_trie(const std::vector<std::string>& files, const trie_config& cfg,
                   const std::string& output) {
    auto [vocab, grams] = read_counts_files(files);
    auto trie = trie_index::build(std::move(vocab), grams, cfg);
    save_index(trie, output);
    return 0;
}

int cmd_build_hash(const std::vector<std::string>& files, const std::string& output) {
    auto [vocab, grams] = read_counts_files(files);
    auto index = hash_index::build(std::move(vocab), grams);
    save_index(index, output);
    return 0;
}

int cmd_lookup(const std::string& index_path) {
    std::string magic = sniff_magic(index_path);
    std::string line;
    std::vector<std::string> storage;
    if (magic == "MPHT") {
        std::ifstream in(index_path, std::ios::binary);
        hash_index index;
        index.load(in);
        while (std::getline(std::cin, line)) {
            auto r = index.lookup_tokens(split_tokens(line, storage));
            if (r)
                std::cout << *r << "\n";
            else
                std::cout << "none\n";
        }
        return 0;
    }
    check(magic == "TRIE", index_path + ": not a recognized index file");
    auto trie = load_trie(index_path);
    bool counts = trie.config().payload == trie_payload::counts;
    while (std::getline(std::cin, line)) {
        auto r = trie.lookup_tokens(split_tokens(line, storage));
        if (!r) {
            std::cout << "none\n";
        } else if (counts) {
            std::cout << r->count << "\n";
        } else {
            std::cout << r->prob;
            if (r->order < trie.order()) std::cout << "\t" << r->backoff;
            std::cout << "\n";
        }
    }
    return 0;
}

int cmd_perplexity(const std::string& index_path, const std::string& input,
                   bool skip_oov) {
    auto trie = load_trie(index_path);
    std::ifstream in(input);
    check(in.good(), "cannot open " + input);
    auto res = perplexity(trie, in, skip_oov);
    json out{{"perplexity", res.perplexity},
             {"words", res.words},
             {"oov", res.oov},
             {"log10_sum", res.log10_sum}};
    std::cout << out.dump() << "\n";
    return 0;
}

int cmd_stats(const std::string& index_path) {
    auto trie = load_trie(index_path);
    auto s = trie.stats();
    json levels = json::array();
    for (uint8_t n = 1; n <= trie.order(); ++n) {
        const auto& ls = s.levels[n];
        double per = ls.entries ? double(ls.id_bits + ls.pointer_bits + ls.payload_bits) /
                                      double(ls.entries)
                                : 0.0;
        levels.push_back({{"order", n},
                          {"grams", ls.entries},
                          {"id_bits", ls.id_bits},
                          {"pointer_bits", ls.pointer_bits},
                          {"payload_bits", ls.payload_bits},
                          {"bits_per_gram", per}});
    }
    json out{{"order", trie.order()},
             {"vocabulary", trie.vocab().size()},
             {"remap", trie.config().remap_k},
             {"grams", s.total_entries},
             {"total_id_bits", s.total_id_bits},
             {"total_bits", s.total_bits},
             {"total_bytes", (s.total_bits + 7) / 8},
             {"bytes_per_gram",
              s.total_entries ? double(s.total_bits) / 8.0 / double(s.total_entries) : 0.0},
             {"levels", levels}};
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"compressed n-gram indexing and language model estimation"};
    app.require_subcommand(1);

    // shared option storage
    uint8_t order = 3, remap = 0, quant_bits = 8;
    std::string ram = "256M", tmp = default_tmp(), fc = "byte";
    uint32_t threads = 1, block_l2 = 64, block_rest = 128;
    bool bos_eos = false, skip_oov = false;
    std::string corpus, output, index_path, input, arpa;
    std::vector<std::string> counts_files;

    auto add_common = [&](CLI::App* c) {
        c->add_option("--ram", ram, "memory budget (K/M/G suffixes)");
        c->add_option("--tmp", tmp, "temporary directory (default: $NGRAM_TMPDIR or .)");
        c->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        c->add_option("--fc", fc, "block compression: off, byte, bit");
        c->add_flag("--bos-eos", bos_eos, "inject sentence-boundary markers");
    };

    auto* count = app.add_subcommand("count", "count n-grams into sorted block files");
    count->add_option("corpus", corpus, "input text, one sentence per line")->required();
    count->add_option("--order", order, "n-gram order")->check(CLI::Range(1, 8));
    add_common(count);

    auto* est = app.add_subcommand("estimate", "estimate a smoothed language model");
    est->add_option("corpus", corpus, "input text, one sentence per line")->required();
    est->add_option("-o,--output", output, "model output path")->required();
    est->add_option("--order", order, "n-gram order")->check(CLI::Range(2, 8));
    est->add_option("--remap", remap, "identifier remapping context length");
    est->add_option("--quant-bits", quant_bits, "probability quantization bits")
        ->check(CLI::Range(2, 32));
    est->add_option("--arpa", arpa, "also write the model in ARPA text form");
    est->add_option("--block-size-l2", block_l2, "partition size for level 2");
    est->add_option("--block-size-rest", block_rest, "partition size for levels >= 3");
    add_common(est);

    auto* bt = app.add_subcommand("build-trie", "build a count trie from text counts");
    bt->add_option("counts", counts_files, "per-order gram<TAB>count files, lowest first")
        ->required();
    bt->add_option("-o,--output", output, "index output path")->required();
    bt->add_option("--remap", remap, "identifier remapping context length");
    bt->add_option("--block-size-l2", block_l2, "partition size for level 2");
    bt->add_option("--block-size-rest", block_rest, "partition size for levels >= 3");

    auto* bh = app.add_subcommand("build-hash", "build a hash index from text counts");
    bh->add_option("counts", counts_files, "per-order gram<TAB>count files, lowest first")
        ->required();
    bh->add_option("-o,--output", output, "index output path")->required();

    auto* lk = app.add_subcommand("lookup", "look up grams read from stdin");
    lk->add_option("--index", index_path, "index file")->required();

    auto* px = app.add_subcommand("perplexity", "evaluate perplexity over a corpus");
    px->add_option("--index", index_path, "probability model file")->required();
    px->add_option("--input", input, "text to score, one sentence per line")->required();
    px->add_flag("--skip-oov", skip_oov, "exclude out-of-vocabulary positions");

    auto* st = app.add_subcommand("stats", "report index sizes");
    st->add_option("--index", index_path, "index file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (count->parsed()) {
            counting_config cc;
            cc.order = order;
            cc.ram_budget = parse_ram(ram);
            cc.tmp_dir = tmp;
            cc.threads = threads;
            cc.bos_eos = bos_eos;
            cc.encoding = parse_fc(fc);
            return cmd_count(corpus, cc);
        }
        if (est->parsed()) {
            estimate_config cfg;
            cfg.order = order;
            cfg.ram_budget = parse_ram(ram);
            cfg.tmp_dir = tmp;
            cfg.threads = threads;
            cfg.quant_bits = quant_bits;
            cfg.remap_k = remap;
            cfg.bos_eos = bos_eos;
            cfg.encoding = parse_fc(fc);
            cfg.block_size_l2 = block_l2;
            cfg.block_size_rest = block_rest;
            cfg.arpa_path = arpa;
            return cmd_estimate(corpus, cfg, output);
        }
        if (bt->parsed()) {
            trie_config cfg;
            cfg.remap_k = remap;
            cfg.block_size_l2 = block_l2;
            cfg.block_size_rest = block_rest;
            return cmd_build_trie(counts_files, cfg, output);
        }
        if (bh->parsed()) return cmd_build_hash(counts_files, output);
        if (lk->parsed()) return cmd_lookup(index_path);
        if (px->parsed()) return cmd_perplexity(index_path, input, skip_oov);
        if (st->parsed()) return cmd_stats(index_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
