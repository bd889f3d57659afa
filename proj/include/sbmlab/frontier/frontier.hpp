#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "sbmlab/core/csv.hpp"
#include "sbmlab/core/error.hpp"
#include "sbmlab/core/fit.hpp"
#include "sbmlab/frontier/field.hpp"

namespace sbm {

struct FrontierSet {
    int d = 1;
    double h = 1;
    double tau = 0;
    std::vector<std::array<int, 3>> cells;
    std::vector<double> scales;       // s = h * 2^k
    std::vector<std::size_t> counts;  // N(s)

    std::size_t size() const { return cells.size(); }
};

// 1st percentile (nearest rank) of the positive values; 0 if none.
inline double default_tau(const LocalTimeField& f, double quantile = 0.01) {
    std::vector<double> pos;
    for (double v : f.values)
        if (v > 0) pos.push_back(v);
    if (pos.empty()) return 0.0;
    const std::size_t k = static_cast<std::size_t>(std::floor(quantile * (pos.size() - 1)));
    std::nth_element(pos.begin(), pos.begin() + static_cast<long>(k), pos.end());
    return pos[k];
}

// Dyadic box counts of a set of cells: N(h 2^k) for k = 0, 1, ... until one box.
inline void box_counts(const std::vector<std::array<int, 3>>& cells, int d, double h, std::vector<double>& scales,
                       std::vector<std::size_t>& counts) {
    scales.clear();
    counts.clear();
    if (cells.empty()) return;
    for (int k = 0; k < 40; ++k) {
        std::unordered_set<std::uint64_t> boxes;
        for (const auto& c : cells) {
            std::uint64_t key = 0;
            for (int i = 0; i < d; ++i) key = (key << 21) | static_cast<std::uint64_t>((c[i] >> k) & 0x1FFFFF);
            boxes.insert(key);
        }
        scales.push_back(h * std::ldexp(1.0, k));
        counts.push_back(boxes.size());
        if (boxes.size() == 1) break;
    }
}

// Cells with value > tau and at least one face neighbour <= tau (cells
// beyond the grid count as zero).
inline FrontierSet extract_frontier(const LocalTimeField& f, double tau) {
    if (!(tau >= 0)) throw domain_error("extract_frontier: tau must be non-negative");
    FrontierSet fs;
    fs.d = f.d;
    fs.h = f.h;
    fs.tau = tau;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f.values[i] > tau)) continue;
        const auto c = f.coords(i);
        bool edge = false;
        for (int a = 0; a < f.d && !edge; ++a)
            for (int s = -1; s <= 1 && !edge; s += 2) {
                auto nb = c;
                nb[a] += s;
                const long long j = f.index(nb);
                if (j < 0 || !(f.values[static_cast<std::size_t>(j)] > tau)) edge = true;
            }
        if (edge) fs.cells.push_back(c);
    }
    box_counts(fs.cells, fs.d, fs.h, fs.scales, fs.counts);
    return fs;
}

// Cells with value > tau, e.g. a synthetic set.
inline FrontierSet positive_set(const LocalTimeField& f, double tau = 0) {
    FrontierSet fs;
    fs.d = f.d;
    fs.h = f.h;
    fs.tau = tau;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.values[i] > tau) fs.cells.push_back(f.coords(i));
    box_counts(fs.cells, fs.d, fs.h, fs.scales, fs.counts);
    return fs;
}

// N(2s) <= N(s) <= 2^d N(2s) for consecutive scales.
inline bool box_count_sandwich(const FrontierSet& fs) {
    for (std::size_t k = 0; k + 1 < fs.counts.size(); ++k) {
        const auto a = fs.counts[k], b = fs.counts[k + 1];
        if (b > a || a > (std::size_t{1} << fs.d) * b) return false;
    }
    return true;
}

// OLS of log N(s) on log(1/s) after dropping the finest `drop_fine` and the
// coarsest `drop_coarse` scales.
inline ExponentFit box_dimension(const FrontierSet& fs, std::size_t drop_fine = 1, std::size_t drop_coarse = 1) {
    const std::size_t n = fs.counts.size();
    if (n < drop_fine + drop_coarse + 4) throw input_error("box_dimension: fewer than 4 dyadic scales in range");
    std::vector<double> x, y;
    for (std::size_t k = drop_fine; k + drop_coarse < n; ++k) {
        x.push_back(std::log(1.0 / fs.scales[k]));
        y.push_back(std::log(static_cast<double>(fs.counts[k])));
    }
    if (fs.counts[drop_fine] < 10) throw input_error("box_dimension: fewer than 10 boxes at the finest scale used");
    ExponentFit fit = ols(x, y, "box_dimension");
    fit.method = "box-count";
    return fit;
}

inline CsvTable frontier_to_csv(const FrontierSet& fs) {
    CsvTable t({"i", "j", "k"});
    t.add_meta("d", std::to_string(fs.d));
    t.add_meta("h", fmt_num(fs.h));
    t.add_meta("tau", fmt_num(fs.tau));
    for (const auto& c : fs.cells) t.row({fmt_num(c[0]), fmt_num(c[1]), fmt_num(c[2])});
    return t;
}

inline CsvTable box_counts_to_csv(const FrontierSet& fs) {
    CsvTable t({"scale", "count"});
    for (std::size_t k = 0; k < fs.counts.size(); ++k) t.row({fmt_num(fs.scales[k]), fmt_num(fs.counts[k])});
    return t;
}

}  // namespace sbm
