#pragma once
#include <string>
#include <vector>

namespace atomgrav::csv {

// Minimal RFC-4180 table: first row is a mandatory header. Fields are quoted
// on write when they contain comma/quote/newline; quotes are doubled. read()
// accepts CRLF or LF and rejects structurally malformed rows with the line
// number in the exception message.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

std::string encode(const Table& t);
Table decode(const std::string& text);

void write_file(const std::string& path, const Table& t);
Table read_file(const std::string& path);

std::string format_double(double v);  // shortest round-trip representation

}  // namespace atomgrav::csv
