#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace strata_audit::stats {

// Linear-interpolation quantile (numpy default) on a copy of the data.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double pos = q * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

inline double median(const std::vector<double>& v) { return quantile(v, 0.5); }

// Median absolute deviation about the median, unscaled.
inline double mad(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const double med = median(v);
    std::vector<double> dev(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
    return median(dev);
}

inline double mean(std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

inline double stddev(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

} // namespace strata_audit::stats
