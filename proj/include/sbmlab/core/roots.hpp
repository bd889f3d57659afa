#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sbmlab/core/error.hpp"

namespace sbm {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int evaluations = 0;
};

// Root of a monotone function on a bracket [a, b] with f(a), f(b) of
// opposite sign. f may return +-inf (treated as "far on that side"); the
// Illinois step is used when both ends are finite, bisection otherwise.
inline RootResult solve_bracketed(const std::function<double(double)>& f, double a, double fa, double b,
                                  double fb, double xtol, double ftol, int max_eval = 400) {
    if (std::signbit(fa) == std::signbit(fb))
        throw convergence_error("solve_bracketed: endpoints do not bracket a root", {a, fa, b, fb});
    RootResult r;
    r.x = std::isfinite(fa) && (!std::isfinite(fb) || std::abs(fa) < std::abs(fb)) ? a : b;
    r.fx = r.x == a ? fa : fb;
    int side = 0;
    for (r.evaluations = 0; r.evaluations < max_eval; ++r.evaluations) {
        double x;
        if (std::isfinite(fa) && std::isfinite(fb)) {
            x = (a * fb - b * fa) / (fb - fa);
            if (!(x > std::min(a, b) && x < std::max(a, b))) x = 0.5 * (a + b);
        } else {
            x = 0.5 * (a + b);
        }
        if (x == a || x == b) return r;  // bracket collapsed to adjacent doubles
        const double fx = f(x);
        r.x = x;
        r.fx = fx;
        if (std::abs(fx) <= ftol || std::abs(b - a) <= xtol) return r;
        if (std::signbit(fx) == std::signbit(fa)) {
            a = x;
            fa = fx;
            if (side == -1 && std::isfinite(fb)) fb *= 0.5;
            side = -1;
        } else {
            b = x;
            fb = fx;
            if (side == 1 && std::isfinite(fa)) fa *= 0.5;
            side = 1;
        }
    }
    throw convergence_error("solve_bracketed: evaluation budget exhausted", {a, fa, b, fb});
}

}  // namespace sbm
