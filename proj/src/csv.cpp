#include "atomgrav/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace atomgrav::csv {

int Table::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

static bool needs_quotes(const std::string& f) {
    return f.find_first_of(",\"\r\n") != std::string::npos;
}

static void encode_field(std::string& out, const std::string& f) {
    if (!needs_quotes(f)) {
        out += f;
        return;
    }
    out += '"';
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
}

static void encode_row(std::string& out, const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
        if (i) out += ',';
        encode_field(out, row[i]);
    }
    out += "\r\n";
}

std::string encode(const Table& t) {
    std::string out;
    encode_row(out, t.header);
    for (const auto& r : t.rows) encode_row(out, r);
    return out;
}

Table decode(const std::string& text) {
    Table t;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_has_data = false;
    size_t line = 1;

    auto end_field = [&] {
        row.push_back(field);
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        if (t.header.empty())
            t.header = row;
        else {
            if (row.size() != t.header.size())
                throw std::runtime_error("csv: line " + std::to_string(line) + ": expected " +
                                         std::to_string(t.header.size()) + " fields, got " +
                                         std::to_string(row.size()));
            t.rows.push_back(row);
        }
        row.clear();
        row_has_data = false;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else
                    in_quotes = false;
            } else {
                field += c;
                if (c == '\n') ++line;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty())
                    throw std::runtime_error("csv: line " + std::to_string(line) +
                                             ": quote inside unquoted field");
                in_quotes = true;
                row_has_data = true;
                break;
            case ',':
                end_field();
                row_has_data = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_has_data || !field.empty() || !row.empty()) end_row();
                ++line;
                break;
            default:
                field += c;
                row_has_data = true;
        }
    }
    if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
    if (row_has_data || !field.empty() || !row.empty()) end_row();
    if (t.header.empty()) throw std::runtime_error("csv: missing header row");
    return t;
}

void write_file(const std::string& path, const Table& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("csv: cannot open for write: " + path);
    f << encode(t);
    if (!f) throw std::runtime_error("csv: write failed: " + path);
}

Table read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("csv: cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return decode(ss.str());
}

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

}  // namespace atomgrav::csv
