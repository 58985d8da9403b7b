#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "common.hpp"

namespace ngram {

// All on-disk integers are little-endian; this code assumes a little-endian
// host (asserted at build time below).
static_assert(std::endian::native == std::endian::little);

template <typename T>
void write_pod(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    static_assert(std::is_trivially_copyable_v<T>);
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    check(bool(in), "unexpected end of stream");
    return v;
}

template <typename T>
void write_vec(std::ostream& out, const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    write_pod<uint64_t>(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
std::vector<T> read_vec(std::istream& in) {
    static_assert(std::is_trivially_copyable_v<T>);
    uint64_t n = read_pod<uint64_t>(in);
    std::vector<T> v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(T)));
    check(bool(in), "unexpected end of stream");
    return v;
}

inline void write_magic(std::ostream& out, const char tag[4], uint16_t version) {
    out.write(tag, 4);
    write_pod<uint16_t>(out, version);
}

inline uint16_t read_magic(std::istream& in, const char tag[4]) {
    char got[4];
    in.read(got, 4);
    check(bool(in) && std::memcmp(got, tag, 4) == 0,
          std::string("bad magic, expected ") + std::string(tag, 4));
    return read_pod<uint16_t>(in);
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_pod<uint64_t>(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    uint64_t n = read_pod<uint64_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    check(bool(in), "unexpected end of stream");
    return s;
}

}  // namespace ngram
