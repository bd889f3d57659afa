#pragma once

#include <cmath>
#include <vector>

#include "sbmlab/core/error.hpp"
#include "sbmlab/core/stats.hpp"
#include "sbmlab/frontier/field.hpp"

namespace sbm {

// max |L(c1) - L(c2)| / h^gamma over face-adjacent cells whose centres lie in
// the annulus r_lo <= |x| <= r_hi.
inline double holder_ratio(const LocalTimeField& f, double gamma, double r_lo, double r_hi) {
    double best = 0;
    const Pos o{0, 0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) {
        const Pos x = f.center(i);
        const double r = dist(x, o, f.d);
        if (r < r_lo || r > r_hi) continue;
        const auto c = f.coords(i);
        for (int a = 0; a < f.d; ++a) {
            auto nb = c;
            nb[a] += 1;
            const long long j = f.index(nb);
            if (j < 0) continue;
            const double rj = dist(f.center(static_cast<std::size_t>(j)), o, f.d);
            if (rj < r_lo || rj > r_hi) continue;
            best = std::max(best, std::abs(f.values[i] - f.values[static_cast<std::size_t>(j)]) / std::pow(f.h, gamma));
        }
    }
    return best;
}

// lambda^(2+2 alpha) * mean(L1 L2 exp(-lambda (L1 + L2))) over replicates.
inline Estimate two_point_moment(const std::vector<double>& l1, const std::vector<double>& l2, double lambda, double alpha) {
    if (l1.size() != l2.size()) throw input_error("two_point_moment: sample sizes differ");
    RunningStats s;
    const double scale = std::pow(lambda, 2 + 2 * alpha);
    for (std::size_t i = 0; i < l1.size(); ++i) s.add(scale * l1[i] * l2[i] * std::exp(-lambda * (l1[i] + l2[i])));
    return estimate(s);
}

}  // namespace sbm
