#pragma once

#include "strata_audit/metric.hpp"

#include <string>
#include <vector>

namespace strata_audit {

// Log-log volume growth curve of one token: samples (s_i = log r_i,
// y_i = log i) for i = 1..p, natural logs. A non-decreasing step function of
// s under the closed-ball convention.
struct GrowthCurve {
    std::size_t anchor = 0;
    std::vector<double> radii;  // original r_i, kept for export
    std::vector<double> s;      // log r_i
    std::vector<double> log_v;  // log i

    std::size_t size() const { return s.size(); }
};

namespace growth {

// Throws GrowthError if the ladder is empty or contains a zero radius
// (duplicate token); log r would be undefined there.
GrowthCurve growth_curve(const RadiusLadder& ladder);

// Right-continuous step evaluation: log of the count at radius e^s. Throws
// GrowthError for s below the first sample (empirical measure is zero).
double vgt_eval(const GrowthCurve& curve, double s);

// CSV with columns token,i,r,s,log_v; curves are concatenated.
void write_curve_csv(const std::string& path, const std::vector<GrowthCurve>& curves);

} // namespace growth

} // namespace strata_audit
