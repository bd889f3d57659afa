#pragma once

#include <cmath>
#include <cstddef>
#include <limits>

namespace sbm {

// Welford accumulator.
class RunningStats {
public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    std::size_t count() const { return n_; }
    double mean() const { return n_ ? mean_ : std::numeric_limits<double>::quiet_NaN(); }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double stderr_mean() const {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : std::numeric_limits<double>::infinity();
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

inline Estimate estimate(const RunningStats& s) { return {s.mean(), s.stderr_mean(), s.count()}; }

// |estimate - target| / se, with se floored to avoid division by zero when
// every sample agrees.
inline double z_score(double est, double se, double target) {
    const double floor = 1e-12 * std::max(1.0, std::abs(target));
    return std::abs(est - target) / std::max(se, floor);
}

}  // namespace sbm
