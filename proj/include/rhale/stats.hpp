#pragma once

#include <cmath>
#include <cstddef>
#include <span>

namespace rhale {

// Count, mean and sum of squared deviations; mergeable (Chan et al.) so that
// statistics of adjacent grid cells can be combined without revisiting points.
struct Moments {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
        const double total = na + nb;
        const double d = o.mean - mean;
        mean += d * nb / total;
        m2 += o.m2 + d * d * na * nb / total;
        n += o.n;
    }

    // Divisor n - 1; only defined for n >= 2.
    double sample_variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double population_variance() const { return n > 0 ? m2 / static_cast<double>(n) : 0.0; }
};

inline double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Two-pass sample variance (divisor n - 1).
inline double sample_variance_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

inline double population_variance_of(std::span<const double> v) {
    if (v.empty()) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size());
}

}  // namespace rhale
