#pragma once

// Delimited-text export/import.  Every file is a single `# key=value ...`
// header line followed by whitespace-separated numeric rows.  Files that
// carry histogram data embed the grid in the header (the "grid stamp"), and
// readers refuse to combine files whose stamps differ.  Numbers are printed
// with %.17g so parsing them back is exact.

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "strmc/errors.hpp"
#include "strmc/histogram.hpp"

namespace strmc {

inline std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct TableHeader {
    std::map<std::string, std::string> kv;
    std::vector<std::string> columns;

    bool has(const std::string& k) const { return kv.count(k) != 0; }
    const std::string& at(const std::string& k) const {
        auto it = kv.find(k);
        if (it == kv.end()) throw Error("table header: missing key '" + k + "'");
        return it->second;
    }
};

class TableWriter {
public:
    // extra: additional header tokens (e.g. the grid stamp), already in
    // key=value form.
    TableWriter(const std::string& path, const std::vector<std::string>& columns,
                const std::string& extra = "") {
        out_.open(path);
        if (!out_) throw Error("cannot open for writing: " + path);
        out_ << "#";
        if (!extra.empty()) out_ << " " << extra;
        out_ << " columns=";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i)
            out_ << (i ? " " : "") << fmt_g17(values[i]);
        out_ << "\n";
    }

    void close() { out_.close(); }

private:
    std::ofstream out_;
};

struct Table {
    TableHeader header;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.columns.size(); ++i)
            if (header.columns[i] == name) return static_cast<int>(i);
        throw Error("table: no column named '" + name + "'");
    }
};

inline Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path);
    Table t;
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#')
        throw Error("missing header line: " + path);
    std::istringstream hs(line.substr(1));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        t.header.kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    if (t.header.has("columns")) {
        std::istringstream cs(t.header.at("columns"));
        std::string col;
        while (std::getline(cs, col, ',')) t.header.columns.push_back(col);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> row;
        double v;
        while (ls >> v) row.push_back(v);
        if (!row.empty()) t.rows.push_back(std::move(row));
    }
    return t;
}

// --- grid stamps -----------------------------------------------------------

inline std::string grid_stamp(const GridSpec& g) { return g.describe(); }

inline GridSpec grid_from_header(const TableHeader& h) {
    auto parse_axis = [&](const std::string& v, double& lo, double& hi, int& n) {
        const auto c1 = v.find(':');
        const auto c2 = v.rfind(':');
        if (c1 == std::string::npos || c2 == c1)
            throw Error("malformed axis token in grid stamp: " + v);
        lo = std::stod(v.substr(0, c1));
        hi = std::stod(v.substr(c1 + 1, c2 - c1 - 1));
        n = std::stoi(v.substr(c2 + 1));
    };
    if (!h.has("axis0")) throw GridMismatchError("file carries no grid stamp");
    double lo, hi;
    int n;
    parse_axis(h.at("axis0"), lo, hi, n);
    if (h.has("axis1")) {
        double lo1, hi1;
        int n1;
        parse_axis(h.at("axis1"), lo1, hi1, n1);
        return GridSpec::rect(lo, hi, n, lo1, hi1, n1);
    }
    return GridSpec::line(lo, hi, n);
}

// --- histograms ------------------------------------------------------------

inline void write_histogram(const std::string& path, const WeightedHistogram& h) {
    const GridSpec& g = h.grid();
    std::vector<std::string> cols =
        g.dims == 1 ? std::vector<std::string>{"center0", "mass"}
                    : std::vector<std::string>{"center0", "center1", "mass"};
    TableWriter w(path, cols, grid_stamp(g));
    if (g.dims == 1) {
        for (int i = 0; i < g.n0; ++i) w.row({g.center0(i), h.mass()[i]});
    } else {
        for (int i = 0; i < g.n0; ++i)
            for (int j = 0; j < g.n1; ++j)
                w.row({g.center0(i), g.center1(j), h.mass()[i * g.n1 + j]});
    }
}

inline WeightedHistogram read_histogram(const std::string& path) {
    const Table t = read_table(path);
    const GridSpec g = grid_from_header(t.header);
    if (static_cast<int>(t.rows.size()) != g.bins())
        throw Error("histogram row count does not match its grid stamp: " + path);
    WeightedHistogram h(g);
    const int mass_col = t.column("mass");
    for (int i = 0; i < g.bins(); ++i) {
        const auto& row = t.rows[i];
        if (mass_col >= static_cast<int>(row.size()))
            throw Error("short histogram row in " + path);
        h.add_bin(i, row[mass_col]);
    }
    return h;
}

}  // namespace strmc
