#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddslab {

// Shortest round-trip formatting (std::to_chars), locale independent so CSV
// output is byte-reproducible across runs.
inline std::string fmt_num(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

inline std::string fmt_num(std::int64_t x) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, r.ptr);
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& cols) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open csv for writing: " + path);
        ncols_ = cols.size();
        write_row(cols);
    }

    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

    void row(std::initializer_list<std::string> cells) {
        write_row(std::vector<std::string>(cells));
    }

    std::size_t ncols() const { return ncols_; }

private:
    std::ofstream out_;
    std::size_t ncols_ = 0;
};

}  // namespace ddslab
