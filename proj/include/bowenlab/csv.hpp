#pragma once

#include <string>
#include <vector>

namespace bowenlab {

// Shortest round-trip decimal representation (std::to_chars).
std::string format_double(double v);

/// RFC-4180 CSV accumulator with "\n" line endings. Cells are quoted only
/// when they contain a comma, quote, or newline.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);
    void row(const std::vector<std::string>& cells);
    const std::string& text() const { return buf_; }

private:
    std::size_t width_;
    std::string buf_;
};

// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& contents);

} // namespace bowenlab
