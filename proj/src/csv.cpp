#include "moralprobe/csv.hpp"

#include "moralprobe/errors.hpp"

namespace moralprobe::csv {

bool Reader::next(std::vector<std::string> &fields) {
    fields.clear();
    std::string line;
    while (true) {
        if (!std::getline(in_, line)) {
            return false;
        }
        ++physical_line_;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            break;
        }
    }
    record_line_ = physical_line_;

    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    std::size_t i = 0;
    while (true) {
        if (i == line.size()) {
            if (quoted) {
                // Quoted field continues on the next physical line.
                std::string more;
                if (!std::getline(in_, more)) {
                    throw DataError("line " + std::to_string(record_line_) +
                                    ": unterminated quoted field");
                }
                ++physical_line_;
                if (!more.empty() && more.back() == '\r') {
                    more.pop_back();
                }
                field.push_back('\n');
                line = std::move(more);
                i = 0;
                continue;
            }
            break;
        }
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !was_quoted) {
            quoted = true;
            was_quoted = true;
        } else if (c == delim_) {
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
        } else {
            field.push_back(c);
        }
        ++i;
    }
    fields.push_back(std::move(field));
    return true;
}

Table::Table(std::istream &in, char delimiter) : reader_{in, delimiter} {
    if (!reader_.next(header_)) {
        throw SchemaError("empty CSV input: missing header row");
    }
    // Strip a UTF-8 byte-order mark from the first column name.
    if (!header_.empty() && header_[0].rfind("\xEF\xBB\xBF", 0) == 0) {
        header_[0].erase(0, 3);
    }
}

std::optional<std::size_t> Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (header_[i] == name) {
            return i;
        }
    }
    return std::nullopt;
}

bool Table::next(std::vector<std::string> &fields) {
    if (!reader_.next(fields)) {
        return false;
    }
    if (fields.size() != header_.size()) {
        throw DataError("line " + std::to_string(reader_.line()) + ": expected " +
                        std::to_string(header_.size()) + " fields, found " +
                        std::to_string(fields.size()));
    }
    return true;
}

std::string escape(std::string_view field, char delimiter) {
    const bool needs_quotes = field.find_first_of(std::string{'"', '\n', '\r', delimiter}) !=
                              std::string_view::npos;
    if (!needs_quotes) {
        return std::string{field};
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream &out, const std::vector<std::string> &fields, char delimiter) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i != 0) {
            out << delimiter;
        }
        out << escape(fields[i], delimiter);
    }
    out << '\n';
}

} // namespace moralprobe::csv
