#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/sim/config.hpp"

namespace sbm {

// Regular grid of d-dimensional cells of side h with lower corner `origin`.
// Mass-time deposited outside the grid goes to `outside`.
class OccupationGrid {
public:
    OccupationGrid() = default;
    OccupationGrid(int d, Pos origin, double h, std::array<int, 3> n) : d_(d), origin_(origin), h_(h), n_(n) {
        if (d < 1 || d > 3) throw domain_error("OccupationGrid: bad dimension");
        if (!(h > 0)) throw domain_error("OccupationGrid: cell side must be positive");
        std::size_t total = 1;
        for (int i = 0; i < d; ++i) {
            if (n[i] < 1) throw domain_error("OccupationGrid: empty axis");
            total *= static_cast<std::size_t>(n[i]);
        }
        for (int i = d; i < 3; ++i) n_[i] = 1;
        cells_.assign(total, 0.0);
    }

    // Cube [-half, half]^d with cells of side h, centred on the origin.
    static OccupationGrid centered(int d, double half, double h) {
        const int n = static_cast<int>(std::ceil(2 * half / h));
        Pos o{0, 0, 0};
        for (int i = 0; i < d; ++i) o[i] = -n * h / 2;
        return OccupationGrid(d, o, h, {n, d > 1 ? n : 1, d > 2 ? n : 1});
    }

    int d() const { return d_; }
    double h() const { return h_; }
    const Pos& origin() const { return origin_; }
    const std::array<int, 3>& shape() const { return n_; }
    std::size_t size() const { return cells_.size(); }
    double outside() const { return outside_; }
    const std::vector<double>& cells() const { return cells_; }
    std::vector<double>& cells() { return cells_; }

    long long index_of(const Pos& x) const {
        long long idx = 0;
        for (int i = d_ - 1; i >= 0; --i) {
            const double f = std::floor((x[i] - origin_[i]) / h_);
            if (f < 0 || f >= n_[i]) return -1;
            idx = idx * n_[i] + static_cast<long long>(f);
        }
        return idx;
    }

    std::array<int, 3> unflatten(std::size_t idx) const {
        std::array<int, 3> c{0, 0, 0};
        for (int i = 0; i < d_; ++i) {
            c[i] = static_cast<int>(idx % n_[i]);
            idx /= n_[i];
        }
        return c;
    }

    Pos cell_center(std::size_t idx) const {
        const auto c = unflatten(idx);
        Pos x{0, 0, 0};
        for (int i = 0; i < d_; ++i) x[i] = origin_[i] + (c[i] + 0.5) * h_;
        return x;
    }

    void deposit(const Pos& x, double amount) {
        const long long i = index_of(x);
        if (i < 0) outside_ += amount;
        else cells_[static_cast<std::size_t>(i)] += amount;
        total_ += amount;
    }

    // Spread `amount` along the segment a -> b in pieces no longer than h/2
    // so that every cell the segment passes through receives a share.
    void deposit_segment(const Pos& a, const Pos& b, double amount) {
        double len = 0;
        for (int i = 0; i < d_; ++i) len = std::max(len, std::abs(b[i] - a[i]));
        const int k = 1 + static_cast<int>(2 * len / h_);
        const double w = amount / k;
        for (int j = 0; j < k; ++j) {
            const double t = (j + 0.5) / k;
            Pos m{0, 0, 0};
            for (int i = 0; i < d_; ++i) m[i] = a[i] + t * (b[i] - a[i]);
            deposit(m, w);
        }
    }

    double total() const { return total_; }

    // Associative merge of another run on the same grid.
    void merge(const OccupationGrid& o) {
        if (o.cells_.size() != cells_.size() || o.h_ != h_) throw input_error("OccupationGrid: merge shape mismatch");
        for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += o.cells_[i];
        outside_ += o.outside_;
        total_ += o.total_;
    }

    void clear() {
        std::fill(cells_.begin(), cells_.end(), 0.0);
        outside_ = total_ = 0;
    }

private:
    int d_ = 1;
    Pos origin_{0, 0, 0};
    double h_ = 1;
    std::array<int, 3> n_{1, 1, 1};
    std::vector<double> cells_;
    double outside_ = 0;
    double total_ = 0;
};

}  // namespace sbm
