#pragma once

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "bit_vector.hpp"
#include "common.hpp"
#include "io.hpp"
#include "ngram_record.hpp"

namespace ngram {

enum class block_encoding : uint8_t { raw = 0, fc_byte = 1, fc_bit = 2 };
enum class block_ordering : uint8_t { unsorted = 0, suffix = 1, context = 2 };

// process-wide accounting used by tests to verify the single-sort claim
struct block_io_stats {
    std::atomic<uint64_t> records_written[max_order + 1]{};
    std::atomic<uint64_t> merges{0};

    void reset() {
        for (auto& r : records_written) r = 0;
        merges = 0;
    }
};

inline block_io_stats& io_stats() {
    static block_io_stats s;
    return s;
}

struct block_header {
    uint8_t order = 0;
    uint64_t records = 0;
    block_encoding encoding = block_encoding::fc_byte;
    uint32_t window_bytes = 64 * 1024 * 1024;
    block_ordering ordering = block_ordering::unsorted;
};

namespace detail {

// key-order column permutation used for shared-prefix computation
inline uint32_t key_column(const block_header& h, uint32_t k) {
    switch (h.ordering) {
        case block_ordering::suffix: return order_key_column(h.order, k, false);
        case block_ordering::context: return order_key_column(h.order, k, true);
        default: return k;
    }
}

inline uint32_t shared_key_prefix(const block_header& h, const ngram_record& a,
                                  const ngram_record& b) {
    uint32_t l = 0;
    while (l < h.order && a.words[key_column(h, l)] == b.words[key_column(h, l)]) ++l;
    return l;
}

inline uint32_t byte_width(uint64_t max_value, uint32_t cap) {
    uint32_t w = 1;
    while (w < cap && (max_value >> (8 * w)) != 0) ++w;
    return w;
}

}  // namespace detail

// Blocks of n-gram records, written in fixed-budget windows. Front-coded
// windows store the first record verbatim and every following record as
// (shared key-prefix length, remaining key-order ids, count); per-window id
// and count widths are sized by the window's maxima. The byte-aligned
// variant is the default; the bit-aligned one trades speed for space.
struct block_writer {
    block_writer(const std::string& path, block_header header)
        : m_header(header), m_out(path, std::ios::binary) {
        check(bool(m_out), "block_writer: cannot open " + path);
        check(m_header.order >= 1 && m_header.order <= max_order,
              "block_writer: bad order");
        write_magic(m_out, "NGBK", 1);
        write_pod<uint8_t>(m_out, m_header.order);
        m_records_pos = m_out.tellp();
        write_pod<uint64_t>(m_out, 0);  // patched on close
        write_pod<uint8_t>(m_out, static_cast<uint8_t>(m_header.encoding));
        write_pod<uint32_t>(m_out, m_header.window_bytes);
        write_pod<uint8_t>(m_out, static_cast<uint8_t>(m_header.ordering));
    }

    ~block_writer() {
        if (m_out.is_open()) close();
    }

    void write(const ngram_record& r) {
        if (estimated_window_bytes() >= m_header.window_bytes) flush_window();
        m_window.push_back(r);
        ++m_total;
        if (m_window.size() == 1) {
            m_shared_total = 0;
        } else {
            uint32_t l = detail::shared_key_prefix(m_header, m_window[m_window.size() - 2], r);
            m_shared.push_back(l);
            m_shared_total += l;
        }
        m_max_id = std::max<uint64_t>(m_max_id, *std::max_element(
            r.words.begin(), r.words.begin() + m_header.order));
        m_max_count = std::max(m_max_count, r.count);
    }

    void close() {
        if (!m_window.empty()) flush_window();
        m_out.seekp(m_records_pos);
        write_pod<uint64_t>(m_out, m_total);
        m_out.close();
        io_stats().records_written[m_header.order] += m_total;
    }

    uint64_t total_records() const { return m_total; }

  private:
    uint64_t estimated_window_bytes() const {
        if (m_window.empty()) return 0;
        uint64_t n = m_window.size();
        uint64_t id_slots = n * m_header.order - m_shared_total;
        if (m_header.encoding == block_encoding::raw)
            return n * (4ull * m_header.order + 8);
        uint32_t idw = detail::byte_width(m_max_id, 4);
        uint32_t cw = detail::byte_width(m_max_count, 8);
        if (m_header.encoding == block_encoding::fc_byte)
            return n * (1 + cw) + id_slots * idw;
        return (n * (8 + 8 * cw) + id_slots * 8ull * idw) / 8;  // coarse, bits at byte widths
    }

    void flush_window() {
        uint32_t idw = detail::byte_width(m_max_id, 4);
        uint32_t cw = detail::byte_width(m_max_count, 8);
        std::vector<uint8_t> body;
        if (m_header.encoding == block_encoding::fc_bit) {
            encode_bits(body, bits_for(m_max_id), bits_for(m_max_count));
            idw = bits_for(m_max_id);
            cw = bits_for(m_max_count);
        } else {
            encode_bytes(body, idw, cw);
        }
        write_pod<uint32_t>(m_out, static_cast<uint32_t>(body.size()));
        write_pod<uint32_t>(m_out, static_cast<uint32_t>(m_window.size()));
        write_pod<uint8_t>(m_out, static_cast<uint8_t>(idw));
        write_pod<uint8_t>(m_out, static_cast<uint8_t>(cw));
        m_out.write(reinterpret_cast<const char*>(body.data()),
                    static_cast<std::streamsize>(body.size()));
        m_window.clear();
        m_shared.clear();
        m_shared_total = 0;
        m_max_id = 0;
        m_max_count = 0;
    }

    void put_le(std::vector<uint8_t>& body, uint64_t v, uint32_t width) const {
        for (uint32_t i = 0; i < width; ++i) body.push_back((v >> (8 * i)) & 0xFF);
    }

    void encode_bytes(std::vector<uint8_t>& body, uint32_t idw, uint32_t cw) const {
        bool raw = m_header.encoding == block_encoding::raw;
        uint32_t riw = raw ? 4 : idw;
        uint32_t rcw = raw ? 8 : cw;
        for (uint64_t i = 0; i < m_window.size(); ++i) {
            uint32_t l = (i == 0 || raw) ? 0 : m_shared[i - 1];
            if (!raw && i > 0) body.push_back(static_cast<uint8_t>(l));
            for (uint32_t k = l; k < m_header.order; ++k)
                put_le(body, m_window[i].words[detail::key_column(m_header, k)], riw);
            put_le(body, m_window[i].count, rcw);
        }
    }

    void encode_bits(std::vector<uint8_t>& body, uint32_t idb, uint32_t cb) const {
        bit_vector_builder bits;
        for (uint64_t i = 0; i < m_window.size(); ++i) {
            uint32_t l = i == 0 ? 0 : m_shared[i - 1];
            if (i > 0) bits.append_bits(l, 8);
            for (uint32_t k = l; k < m_header.order; ++k)
                bits.append_bits(m_window[i].words[detail::key_column(m_header, k)], idb);
            bits.append_bits(m_window[i].count, cb);
        }
        body.resize((bits.size() + 7) / 8);
        std::memcpy(body.data(), bits.m_words.data(), body.size());
    }

    block_header m_header;
    std::ofstream m_out;
    std::streampos m_records_pos;
    std::vector<ngram_record> m_window;
    std::vector<uint32_t> m_shared;  // shared prefix vs previous, per record > 0
    uint64_t m_shared_total = 0;
    uint64_t m_max_id = 0;
    uint64_t m_max_count = 0;
    uint64_t m_total = 0;
};

// Streaming reader with a background prefetch thread: raw window buffers are
// fetched ahead through a small bounded queue while the consumer decodes.
struct block_reader {
    explicit block_reader(const std::string& path, bool prefetch = true) {
        m_in.open(path, std::ios::binary);
        check(bool(m_in), "block_reader: cannot open " + path);
        read_magic(m_in, "NGBK");
        m_header.order = read_pod<uint8_t>(m_in);
        m_header.records = read_pod<uint64_t>(m_in);
        m_header.encoding = static_cast<block_encoding>(read_pod<uint8_t>(m_in));
        m_header.window_bytes = read_pod<uint32_t>(m_in);
        m_header.ordering = static_cast<block_ordering>(read_pod<uint8_t>(m_in));
        if (prefetch && m_header.records)
            m_fetcher = std::thread([this] { fetch_loop(); });
        else
            m_sync = true;
    }

    ~block_reader() {
        {
            std::lock_guard<std::mutex> lock(m_mutex);
            m_stop = true;
        }
        m_cv.notify_all();
        if (m_fetcher.joinable()) m_fetcher.join();
    }

    const block_header& header() const { return m_header; }

    bool next(ngram_record& out) {
        if (m_read == m_header.records) return false;
        if (m_pos == m_win_records) {
            if (!next_window()) return false;
        }
        decode_next(out);
        ++m_read;
        return true;
    }

  private:
    struct window {
        std::vector<uint8_t> body;
        uint32_t records;
        uint8_t id_width;
        uint8_t count_width;
    };

    bool read_window(window& w) {
        uint32_t len;
        if (!m_in.read(reinterpret_cast<char*>(&len), 4)) return false;
        w.records = read_pod<uint32_t>(m_in);
        w.id_width = read_pod<uint8_t>(m_in);
        w.count_width = read_pod<uint8_t>(m_in);
        w.body.resize(len);
        m_in.read(reinterpret_cast<char*>(w.body.data()), len);
        check(bool(m_in), "block_reader: truncated window");
        return true;
    }

    void fetch_loop() {
        window w;
        while (read_window(w)) {
            std::unique_lock<std::mutex> lock(m_mutex);
            m_cv.wait(lock, [this] { return m_queue.size() < 2 || m_stop; });
            if (m_stop) return;
            m_queue.push_back(std::move(w));
            m_cv.notify_all();
        }
        std::lock_guard<std::mutex> lock(m_mutex);
        m_done = true;
        m_cv.notify_all();
    }

    bool next_window() {
        if (m_sync) {
            if (!read_window(m_win)) return false;
        } else {
            std::unique_lock<std::mutex> lock(m_mutex);
            m_cv.wait(lock, [this] { return !m_queue.empty() || m_done; });
            if (m_queue.empty()) return false;
            m_win = std::move(m_queue.front());
            m_queue.pop_front();
            m_cv.notify_all();
        }
        m_pos = 0;
        m_win_records = m_win.records;
        m_cursor = 0;
        return true;
    }

    uint64_t get_le(uint32_t width) {
        uint64_t v = 0;
        for (uint32_t i = 0; i < width; ++i) v |= uint64_t(m_win.body[m_cursor++]) << (8 * i);
        return v;
    }

    uint64_t get_bits(uint32_t width) {
        uint64_t v = 0;
        for (uint32_t i = 0; i < width; ++i, ++m_cursor)
            v |= uint64_t((m_win.body[m_cursor >> 3] >> (m_cursor & 7)) & 1) << i;
        return v;
    }

    void decode_next(ngram_record& out) {
        bool bitmode = m_header.encoding == block_encoding::fc_bit;
        bool raw = m_header.encoding == block_encoding::raw;
        uint32_t idw = raw ? 4 : m_win.id_width;
        uint32_t cw = raw ? 8 : m_win.count_width;
        uint32_t l = 0;
        if (m_pos > 0 && !raw) l = static_cast<uint32_t>(bitmode ? get_bits(8) : get_le(1));
        check(l <= m_header.order, "block_reader: corrupt shared prefix length");
        out = m_prev;
        for (uint32_t k = l; k < m_header.order; ++k)
            out.words[detail::key_column(m_header, k)] =
                static_cast<uint32_t>(bitmode ? get_bits(idw) : get_le(idw));
        out.count = bitmode ? get_bits(cw) : get_le(cw);
        m_prev = out;
        ++m_pos;
    }

    std::ifstream m_in;
    block_header m_header;
    window m_win;
    uint32_t m_pos = 0;
    uint32_t m_win_records = 0;
    uint64_t m_cursor = 0;  // byte cursor (byte modes) or bit cursor (bit mode)
    uint64_t m_read = 0;
    ngram_record m_prev;

    bool m_sync = false;
    std::thread m_fetcher;
    std::mutex m_mutex;
    std::condition_variable m_cv;
    std::deque<window> m_queue;
    bool m_done = false;
    bool m_stop = false;
};

}  // namespace ngram
