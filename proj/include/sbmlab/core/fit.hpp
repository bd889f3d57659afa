#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sbmlab/core/error.hpp"

namespace sbm {

struct ExponentFit {
    std::string name;
    double estimate = 0.0;
    double stderr_ = 0.0;
    double r2 = 0.0;
    std::size_t n_points = 0;
    double intercept = 0.0;
    std::string method = "ols";
    // Data used in the fit, kept for plotting.
    std::vector<double> xs, ys;
};

// Ordinary least squares y = a + b x. Returns slope b with its standard error.
inline ExponentFit ols(const std::vector<double>& x, const std::vector<double>& y, std::string name = "") {
    if (x.size() != y.size()) throw input_error("ols: size mismatch");
    const std::size_t n = x.size();
    if (n < 2) throw input_error("ols: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0) throw input_error("ols: degenerate abscissae");
    ExponentFit f;
    f.name = std::move(name);
    f.estimate = sxy / sxx;
    f.intercept = my - f.estimate * mx;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - f.intercept - f.estimate * x[i];
        sse += r * r;
    }
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    f.stderr_ = n > 2 ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
    f.n_points = n;
    f.xs = x;
    f.ys = y;
    return f;
}

// Slope of log y against log x. Non-positive entries are rejected.
inline ExponentFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y, std::string name = "") {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw input_error("loglog_fit: non-positive value");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return ols(lx, ly, std::move(name));
}

}  // namespace sbm
