#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sbmlab/core/csv.hpp"
#include "sbmlab/core/error.hpp"
#include "sbmlab/sim/occupation.hpp"

namespace sbm {

// Cell-averaged local time L(cell) = occupation(cell) / h^d.
struct LocalTimeField {
    int d = 1;
    Pos origin{0, 0, 0};
    double h = 1;
    std::array<int, 3> shape{1, 1, 1};
    std::vector<double> values;
    std::string normalization = "occupation/h^d";
    double N = 0;
    std::uint64_t replicate = 0;
    double recorded = 0;  // occupation inside the grid
    double outside = 0;   // occupation that fell outside the grid

    std::size_t size() const { return values.size(); }

    std::array<int, 3> coords(std::size_t idx) const {
        std::array<int, 3> c{0, 0, 0};
        for (int i = 0; i < d; ++i) {
            c[i] = static_cast<int>(idx % shape[i]);
            idx /= shape[i];
        }
        return c;
    }
    long long index(const std::array<int, 3>& c) const {
        long long idx = 0;
        for (int i = d - 1; i >= 0; --i) {
            if (c[i] < 0 || c[i] >= shape[i]) return -1;
            idx = idx * shape[i] + c[i];
        }
        return idx;
    }
    Pos center(std::size_t idx) const {
        const auto c = coords(idx);
        Pos x{0, 0, 0};
        for (int i = 0; i < d; ++i) x[i] = origin[i] + (c[i] + 0.5) * h;
        return x;
    }
    double cell_volume() const { return std::pow(h, d); }

    CsvTable to_csv() const {
        CsvTable t({"cell", "i", "j", "k", "x", "y", "z", "value"});
        t.add_meta("d", std::to_string(d));
        t.add_meta("h", fmt_num(h));
        t.add_meta("normalization", normalization);
        t.add_meta("N", fmt_num(N));
        t.add_meta("replicate", std::to_string(replicate));
        for (std::size_t i = 0; i < values.size(); ++i) {
            const auto c = coords(i);
            const Pos x = center(i);
            t.row({fmt_num(i), fmt_num(c[0]), fmt_num(c[1]), fmt_num(c[2]), fmt_num(x[0]), fmt_num(x[1]), fmt_num(x[2]), fmt_num(values[i])});
        }
        return t;
    }
};

inline LocalTimeField build_field(const OccupationGrid& occ, double N = 0, std::uint64_t replicate = 0) {
    LocalTimeField f;
    f.d = occ.d();
    f.origin = occ.origin();
    f.h = occ.h();
    f.shape = occ.shape();
    f.N = N;
    f.replicate = replicate;
    const double vol = f.cell_volume();
    f.values.resize(occ.size());
    double s = 0;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        f.values[i] = occ.cells()[i] / vol;
        s += occ.cells()[i];
    }
    f.recorded = s;
    f.outside = occ.outside();
    return f;
}

// Same, checking the occupation grid against the expected layout.
inline LocalTimeField build_field(const OccupationGrid& occ, const OccupationGrid& expected, double N = 0, std::uint64_t replicate = 0) {
    if (occ.d() != expected.d() || occ.h() != expected.h() || occ.shape() != expected.shape() || occ.origin() != expected.origin())
        throw input_error("build_field: occupation grid does not match the expected grid");
    return build_field(occ, N, replicate);
}

// Synthetic fields for oracle tests: indicator of a set of cells.
inline LocalTimeField indicator_field(int d, int n, double h, const std::function<bool(const std::array<int, 3>&)>& in) {
    LocalTimeField f;
    f.d = d;
    f.h = h;
    f.shape = {n, d > 1 ? n : 1, d > 2 ? n : 1};
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
    f.values.assign(total, 0.0);
    f.normalization = "indicator";
    for (std::size_t i = 0; i < total; ++i)
        if (in(f.coords(i))) f.values[i] = 1.0;
    for (double v : f.values) f.recorded += v * f.cell_volume();
    return f;
}

inline LocalTimeField ball_field(int d, int n, double radius_cells) {
    const double c = 0.5 * (n - 1);
    return indicator_field(d, n, 1.0, [&](const std::array<int, 3>& k) {
        double s = 0;
        for (int i = 0; i < d; ++i) s += (k[i] - c) * (k[i] - c);
        return s <= radius_cells * radius_cells;
    });
}

}  // namespace sbm
