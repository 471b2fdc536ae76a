#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

namespace speq {

/// Shortest round-trip decimal form of a double, locale-independent ('.' always).
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Minimal CSV emitter. Output is byte-deterministic for identical inputs:
/// fixed header, '\n' line ends, to_chars number formatting, no timestamps.
class CsvWriter {
  public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::ios_base::failure("cannot open " + path);
    }

    void header(std::span<const std::string> names) { line(names); }

    void row(std::span<const double> values) {
        std::string s;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) s += ',';
            s += format_double(values[i]);
        }
        s += '\n';
        out_ << s;
    }

    void line(std::span<const std::string> cells) {
        std::string s;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
        out_ << s;
    }

  private:
    std::ofstream out_;
};

}  // namespace speq
