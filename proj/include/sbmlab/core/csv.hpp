#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sbmlab/core/error.hpp"

namespace sbm {

// Fixed round-trip formatting so reruns produce identical bytes.
inline std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string fmt_num(long long v) { return std::to_string(v); }
inline std::string fmt_num(std::size_t v) { return std::to_string(v); }
inline std::string fmt_num(int v) { return std::to_string(v); }

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    // Comment lines written before the header, e.g. "# kind=v_lambda".
    void add_meta(const std::string& key, const std::string& value) { meta_.push_back(key + "=" + value); }

    CsvTable& row(std::vector<std::string> cells) {
        if (cells.size() != header_.size()) throw input_error("csv row width mismatch");
        rows_.push_back(std::move(cells));
        return *this;
    }

    std::string str() const {
        std::ostringstream os;
        for (const auto& m : meta_) os << "# " << m << '\n';
        write_line(os, header_);
        for (const auto& r : rows_) write_line(os, r);
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw input_error("cannot write " + path);
        f << str();
    }

    const std::vector<std::string>& header() const { return header_; }
    const std::vector<std::vector<std::string>>& rows() const { return rows_; }
    const std::vector<std::string>& meta() const { return meta_; }

private:
    static void write_line(std::ostream& os, const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) os << ',';
            const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
            if (quote) {
                os << '"';
                for (char c : cells[i]) {
                    if (c == '"') os << '"';
                    os << c;
                }
                os << '"';
            } else {
                os << cells[i];
            }
        }
        os << '\n';
    }

    std::vector<std::string> header_;
    std::vector<std::string> meta_;
    std::vector<std::vector<std::string>> rows_;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool q = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (q) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                q = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            q = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw input_error("cannot read " + path);
    std::string line;
    std::vector<std::string> meta;
    std::vector<std::string> header;
    while (std::getline(f, line)) {
        if (line.rfind("# ", 0) == 0) {
            meta.push_back(line.substr(2));
            continue;
        }
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) throw input_error("csv without header: " + path);
    CsvTable t(header);
    for (const auto& m : meta) {
        const auto eq = m.find('=');
        t.add_meta(m.substr(0, eq), eq == std::string::npos ? "" : m.substr(eq + 1));
    }
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw input_error("ragged csv row in " + path);
        t.row(std::move(cells));
    }
    return t;
}

}  // namespace sbm
