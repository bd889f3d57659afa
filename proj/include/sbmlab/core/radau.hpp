#pragma once

// Fully implicit 3-stage Radau IIA (order 5) with step-doubling error
// control. Small dense systems only: the Newton matrix is (3N)x(3N).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace sbm {

template <std::size_t N>
using Vec = std::array<double, N>;

template <std::size_t N>
using Mat = std::array<std::array<double, N>, N>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_init = 1e-3;
    double h_max = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 2000000;
};

enum class OdeStatus { reached, stopped, step_underflow, too_many_steps };

namespace detail {

template <std::size_t M>
bool lu_solve(std::array<std::array<double, M>, M> a, std::array<double, M>& b) {
    std::array<std::size_t, M> piv{};
    for (std::size_t k = 0; k < M; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < M; ++i)
            if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
        if (a[p][k] == 0.0) return false;
        std::swap(a[p], a[k]);
        std::swap(b[p], b[k]);
        piv[k] = p;
        for (std::size_t i = k + 1; i < M; ++i) {
            const double f = a[i][k] / a[k][k];
            if (f == 0.0) continue;
            for (std::size_t j = k; j < M; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    for (std::size_t k = M; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < M; ++j) s -= a[k][j] * b[j];
        b[k] = s / a[k][k];
    }
    return true;
}

struct RadauTableau {
    double c[3];
    double a[3][3];
    RadauTableau() {
        const double s6 = std::sqrt(6.0);
        c[0] = (4.0 - s6) / 10.0;
        c[1] = (4.0 + s6) / 10.0;
        c[2] = 1.0;
        a[0][0] = (88.0 - 7.0 * s6) / 360.0;
        a[0][1] = (296.0 - 169.0 * s6) / 1800.0;
        a[0][2] = (-2.0 + 3.0 * s6) / 225.0;
        a[1][0] = (296.0 + 169.0 * s6) / 1800.0;
        a[1][1] = (88.0 + 7.0 * s6) / 360.0;
        a[1][2] = (-2.0 - 3.0 * s6) / 225.0;
        a[2][0] = (16.0 - s6) / 36.0;
        a[2][1] = (16.0 + s6) / 36.0;
        a[2][2] = 1.0 / 9.0;
    }
};

inline const RadauTableau& radau_tableau() {
    static const RadauTableau t;
    return t;
}

}  // namespace detail

// Sys must provide
//   void f(double t, const Vec<N>& y, Vec<N>& dy) const;
//   void jac(double t, const Vec<N>& y, Mat<N>& J) const;
template <std::size_t N, class Sys>
class RadauIntegrator {
public:
    RadauIntegrator(const Sys& sys, OdeOptions opt = {}) : sys_(sys), opt_(opt), h_(opt.h_init) {}

    // One implicit step of size h (may be negative). Returns false if the
    // simplified Newton iteration does not converge.
    bool single_step(double t, const Vec<N>& y, double h, Vec<N>& out) const {
        const auto& tb = detail::radau_tableau();
        Mat<N> J;
        sys_.jac(t, y, J);
        constexpr std::size_t M = 3 * N;
        std::array<std::array<double, M>, M> newton{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t r = 0; r < N; ++r)
                    for (std::size_t c = 0; c < N; ++c)
                        newton[i * N + r][j * N + c] = (i == j && r == c ? 1.0 : 0.0) - h * tb.a[i][j] * J[r][c];
        std::array<Vec<N>, 3> z{};
        // Explicit predictor from the derivative at the left end.
        Vec<N> f0;
        sys_.f(t, y, f0);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t r = 0; r < N; ++r) z[i][r] = tb.c[i] * h * f0[r];
        double prev = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 12; ++it) {
            std::array<Vec<N>, 3> fz;
            for (std::size_t j = 0; j < 3; ++j) {
                Vec<N> yj;
                for (std::size_t r = 0; r < N; ++r) yj[r] = y[r] + z[j][r];
                sys_.f(t + tb.c[j] * h, yj, fz[j]);
            }
            std::array<double, M> g{};
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t r = 0; r < N; ++r) {
                    double s = z[i][r];
                    for (std::size_t j = 0; j < 3; ++j) s -= h * tb.a[i][j] * fz[j][r];
                    g[i * N + r] = -s;
                }
            if (!detail::lu_solve<M>(newton, g)) return false;
            double nrm = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t r = 0; r < N; ++r) {
                    z[i][r] += g[i * N + r];
                    const double sc = opt_.atol + opt_.rtol * std::abs(y[r] + z[i][r]);
                    nrm = std::max(nrm, std::abs(g[i * N + r]) / sc);
                }
            if (!std::isfinite(nrm)) return false;
            if (nrm < 1e-3) {
                for (std::size_t r = 0; r < N; ++r) out[r] = y[r] + z[2][r];
                return true;
            }
            if (it > 2 && nrm > 0.9 * prev) return false;
            prev = nrm;
        }
        return false;
    }

    // Advance y from t to t_end. `stop(t, y)` is evaluated after every
    // accepted step; returning true halts the integration there.
    template <class Stop>
    OdeStatus advance(double& t, Vec<N>& y, double t_end, Stop&& stop) {
        const double dir = t_end >= t ? 1.0 : -1.0;
        std::size_t steps = 0;
        while (dir * (t_end - t) > 0) {
            if (++steps > opt_.max_steps) return OdeStatus::too_many_steps;
            double h = std::min({std::abs(h_), opt_.h_max, std::abs(t_end - t)});
            const bool last = h >= std::abs(t_end - t);
            const double hmin = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
            if (h < hmin) return OdeStatus::step_underflow;
            Vec<N> big, half, fine;
            const double hs = dir * h;
            bool ok = single_step(t, y, hs, big) && single_step(t, y, hs / 2, half) &&
                      single_step(t + hs / 2, half, hs / 2, fine);
            double err = std::numeric_limits<double>::infinity();
            if (ok) {
                err = 0.0;
                for (std::size_t r = 0; r < N; ++r) {
                    const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y[r]), std::abs(fine[r]));
                    err = std::max(err, std::abs(fine[r] - big[r]) / 31.0 / sc);
                }
                if (!std::isfinite(err)) ok = false;
            }
            if (!ok) {
                h_ = h / 4;
                continue;
            }
            if (err <= 1.0) {
                t = last ? t_end : t + hs;
                y = fine;
                const double grow = err > 0 ? 0.9 * std::pow(err, -1.0 / 6.0) : 4.0;
                // A clipped final step says nothing about the natural step size.
                if (!last || grow < 1.0) h_ = h * std::clamp(grow, 0.2, 4.0);
                if (stop(t, y)) return OdeStatus::stopped;
            } else {
                h_ = h * std::clamp(0.9 * std::pow(err, -1.0 / 6.0), 0.1, 0.9);
            }
        }
        return OdeStatus::reached;
    }

    OdeStatus advance(double& t, Vec<N>& y, double t_end) {
        return advance(t, y, t_end, [](double, const Vec<N>&) { return false; });
    }

    double step_size() const { return h_; }
    void set_step_size(double h) { h_ = h; }

private:
    const Sys& sys_;
    OdeOptions opt_;
    double h_;
};

}  // namespace sbm
