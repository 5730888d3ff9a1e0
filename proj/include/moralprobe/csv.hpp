#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace moralprobe::csv {

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerant.
// Embedded newlines inside quotes are supported; line() reports the physical
// line on which the current record started.
class Reader {
  public:
    explicit Reader(std::istream &in, char delimiter = ',') : in_{in}, delim_{delimiter} {}

    // Returns false at end of input. Blank lines are skipped.
    bool next(std::vector<std::string> &fields);
    [[nodiscard]] std::size_t line() const noexcept { return record_line_; }

  private:
    std::istream &in_;
    char delim_;
    std::size_t physical_line_ = 0;
    std::size_t record_line_ = 0;
};

// Header-indexed view over a reader.
class Table {
  public:
    Table(std::istream &in, char delimiter = ',');

    [[nodiscard]] const std::vector<std::string> &header() const noexcept { return header_; }
    [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
    bool next(std::vector<std::string> &fields);
    [[nodiscard]] std::size_t line() const noexcept { return reader_.line(); }

  private:
    Reader reader_;
    std::vector<std::string> header_;
};

std::string escape(std::string_view field, char delimiter = ',');
void write_row(std::ostream &out, const std::vector<std::string> &fields, char delimiter = ',');

} // namespace moralprobe::csv
