#include "strata_audit/growth.hpp"

#include "strata_audit/errors.hpp"
#include "strata_audit/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace strata_audit::growth {

GrowthCurve growth_curve(const RadiusLadder& ladder) {
    if (ladder.radii.empty()) throw GrowthError("empty ladder");
    if (ladder.zero_count > 0)
        throw GrowthError("ladder for anchor " + std::to_string(ladder.anchor) +
                          " has zero radii (duplicate tokens); deduplicate or drop them");
    GrowthCurve curve;
    curve.anchor = ladder.anchor;
    const std::size_t p = ladder.radii.size();
    curve.radii = ladder.radii;
    curve.s.resize(p);
    curve.log_v.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
        curve.s[k] = std::log(ladder.radii[k]);
        curve.log_v[k] = std::log(static_cast<double>(k + 1));
    }
    return curve;
}

double vgt_eval(const GrowthCurve& curve, double s) {
    if (curve.s.empty() || s < curve.s.front())
        throw GrowthError("VGT undefined below the first sample abscissa");
    // Largest sample with s_k <= s; with tied abscissae this lands on the last
    // of the tie run, i.e. the full count at that radius.
    const auto it = std::upper_bound(curve.s.begin(), curve.s.end(), s);
    return curve.log_v[static_cast<std::size_t>(it - curve.s.begin()) - 1];
}

void write_curve_csv(const std::string& path, const std::vector<GrowthCurve>& curves) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw GrowthError("cannot open file for writing: " + path);
    out << "token,i,r,s,log_v\n";
    for (const GrowthCurve& curve : curves) {
        for (std::size_t k = 0; k < curve.size(); ++k) {
            out << curve.anchor << ',' << (k + 1) << ',' << text::format_double(curve.radii[k])
                << ',' << text::format_double(curve.s[k]) << ','
                << text::format_double(curve.log_v[k]) << '\n';
        }
    }
    if (!out) throw GrowthError("write failed: " + path);
}

} // namespace strata_audit::growth
