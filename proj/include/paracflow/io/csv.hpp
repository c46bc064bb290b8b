#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "paracflow/core/common.hpp"

namespace paracflow::io {

/// Doubles are printed with 17 significant digits so identical runs produce
/// byte-identical files.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header)
        : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
        columns_ = header.size();
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) out_ << ',';
            out_ << header[i];
        }
        out_ << '\n';
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_)
            throw std::invalid_argument("csv: row width does not match header");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    static std::string cell(double x) { return format_double(x); }
    static std::string cell(long long x) { return std::to_string(x); }
    static std::string cell(int x) { return std::to_string(x); }
    static std::string cell(std::uint64_t x) { return std::to_string(x); }
    static std::string cell(const std::string& s) { return s; }

private:
    std::ofstream out_;
    std::size_t columns_ = 0;
};

/// Order-sensitive hash of a vector's bit patterns; used to tag contexts in
/// result files without printing every component.
inline std::uint64_t hash_vector(Span v) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double x : v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace paracflow::io
