#include "strata_audit/strata.hpp"

#include "strata_audit/dimension.hpp"
#include "strata_audit/errors.hpp"
#include "strata_audit/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace strata_audit::strata {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// O(1) segment SSE from prefix sums. The DP uses this; reported segments are
// refit with the centered OLS for numerical agreement with fit_loglog.
struct PrefixSums {
    std::vector<double> s, ss, y, yy, sy;

    explicit PrefixSums(const GrowthCurve& c) {
        const std::size_t p = c.size();
        s.assign(p + 1, 0.0);
        ss.assign(p + 1, 0.0);
        y.assign(p + 1, 0.0);
        yy.assign(p + 1, 0.0);
        sy.assign(p + 1, 0.0);
        for (std::size_t i = 0; i < p; ++i) {
            s[i + 1] = s[i] + c.s[i];
            ss[i + 1] = ss[i] + c.s[i] * c.s[i];
            y[i + 1] = y[i] + c.log_v[i];
            yy[i + 1] = yy[i] + c.log_v[i] * c.log_v[i];
            sy[i + 1] = sy[i] + c.s[i] * c.log_v[i];
        }
    }

    double sse(std::size_t a, std::size_t b) const {  // samples [a, b)
        const double n = static_cast<double>(b - a);
        const double sx = s[b] - s[a];
        const double sxx = ss[b] - ss[a];
        const double sy1 = y[b] - y[a];
        const double syy = yy[b] - yy[a];
        const double sxy = sy[b] - sy[a];
        const double cxx = sxx - sx * sx / n;
        const double cyy = syy - sy1 * sy1 / n;
        const double cxy = sxy - sx * sy1 / n;
        if (cxx <= 0.0) return std::max(cyy, 0.0);
        return std::max(cyy - cxy * cxy / cxx, 0.0);
    }
};

} // namespace

Segmentation segment_curve(const GrowthCurve& curve, const SegmentOptions& opts) {
    const std::size_t p = curve.size();
    if (p < 4) throw SegmentError("segmentation needs at least 4 samples");
    if (opts.max_segments < 1) throw SegmentError("max_segments must be >= 1");
    if (opts.min_seg_len < 2) throw SegmentError("min_seg_len must be >= 2");

    const PrefixSums sums(curve);

    double penalty = opts.penalty;
    if (!(penalty > 0.0)) {
        const double sigma2 = sums.sse(0, p) / static_cast<double>(p);
        penalty = 2.0 * sigma2 * std::log(static_cast<double>(p));
    }

    // Candidate boundary positions; thinned for long curves, endpoints kept.
    std::vector<std::size_t> cand;
    const std::size_t stride = std::max<std::size_t>(1, (p + opts.max_candidates - 1) / opts.max_candidates);
    for (std::size_t pos = 0; pos < p; pos += stride) cand.push_back(pos);
    if (cand.back() != p) cand.push_back(p);
    const std::size_t m = cand.size();

    // A segment [a, b) is admissible when it is long enough and its abscissae
    // are not all tied (s is sorted, so distinct <=> endpoints differ).
    auto admissible = [&](std::size_t a, std::size_t b) {
        return b - a >= opts.min_seg_len && curve.s[b - 1] > curve.s[a];
    };

    const std::size_t max_k = std::min(opts.max_segments, p / opts.min_seg_len);
    std::vector<std::vector<double>> dp(max_k + 1, std::vector<double>(m, kInf));
    std::vector<std::vector<std::size_t>> parent(max_k + 1, std::vector<std::size_t>(m, 0));
    for (std::size_t j = 0; j < m; ++j)
        if (cand[j] > 0 && admissible(0, cand[j])) dp[1][j] = sums.sse(0, cand[j]);
    for (std::size_t k = 2; k <= max_k; ++k) {
        for (std::size_t j = k; j < m; ++j) {
            double best = kInf;
            std::size_t arg = 0;
            for (std::size_t i = k - 1; i < j; ++i) {
                if (dp[k - 1][i] == kInf || !admissible(cand[i], cand[j])) continue;
                const double cost = dp[k - 1][i] + sums.sse(cand[i], cand[j]);
                if (cost < best) {
                    best = cost;
                    arg = i;
                }
            }
            dp[k][j] = best;
            parent[k][j] = arg;
        }
    }

    std::size_t best_k = 1;
    double best_total = kInf;
    for (std::size_t k = 1; k <= max_k; ++k) {
        if (dp[k][m - 1] == kInf) continue;
        const double total = dp[k][m - 1] + penalty * static_cast<double>(k);
        if (total < best_total) {  // strict: ties keep the smaller k
            best_total = total;
            best_k = k;
        }
    }
    if (best_total == kInf) throw SegmentError("no admissible segmentation");

    std::vector<std::size_t> bounds(best_k + 1);
    bounds[best_k] = m - 1;
    for (std::size_t k = best_k; k >= 2; --k) bounds[k - 1] = parent[k][bounds[k]];
    bounds[0] = 0;

    Segmentation seg;
    seg.anchor = curve.anchor;
    seg.penalty = penalty;
    double total_sse = 0.0;
    for (std::size_t k = 0; k < best_k; ++k) {
        const std::size_t a = cand[bounds[k]];
        const std::size_t b = cand[bounds[k + 1]];
        SegmentFit fit;
        fit.first = a;
        fit.count = b - a;
        fit.s_lo = curve.s[a];
        fit.s_hi = curve.s[b - 1];
        const std::span<const double> xs(curve.s.data() + a, b - a);
        const std::span<const double> ys(curve.log_v.data() + a, b - a);
        const LineFit line = dimension::fit_loglog(xs, ys);
        fit.slope = line.degenerate ? 0.0 : line.slope;
        fit.intercept = line.degenerate ? 0.0 : line.intercept;
        fit.sse = line.residual_rms * line.residual_rms * static_cast<double>(b - a);
        if (line.degenerate) fit.sse = sums.sse(a, b);
        total_sse += fit.sse;
        seg.segments.push_back(fit);
        if (k > 0) seg.breakpoints.push_back(curve.s[a]);
    }
    seg.total_cost = total_sse + penalty * static_cast<double>(best_k);
    return seg;
}

Segmentation segment_curve(const GrowthCurve& curve, std::size_t max_segments, double penalty) {
    SegmentOptions opts;
    opts.max_segments = max_segments;
    opts.penalty = penalty;
    return segment_curve(curve, opts);
}

StrataClass classify_token(const Segmentation& seg, double slope_tol) {
    if (!(slope_tol > 0.0)) throw ConfigError("slope_tol must be > 0");
    StrataClass cls;
    for (const SegmentFit& s : seg.segments) cls.slope_sequence.push_back(s.slope);
    cls.evidence = corner_report(seg);

    bool any_increase = false;
    bool all_within_tol = true;
    bool all_decrease_beyond = !cls.evidence.empty();
    for (const Corner& c : cls.evidence) {
        if (c.delta > slope_tol) any_increase = true;
        if (std::abs(c.delta) > slope_tol) all_within_tol = false;
        if (!(c.delta < -slope_tol)) all_decrease_beyond = false;
    }

    if (any_increase)
        cls.label = StrataLabel::Flare;
    else if (cls.evidence.empty() || all_within_tol)
        cls.label = StrataLabel::Manifold;
    else if (all_decrease_beyond)
        cls.label = StrataLabel::FiberBundle;
    else  // significant decreases mixed with in-tolerance changes
        cls.label = StrataLabel::Ambiguous;
    return cls;
}

std::vector<Corner> corner_report(const Segmentation& seg) {
    std::vector<Corner> corners;
    for (std::size_t k = 1; k < seg.segments.size(); ++k) {
        Corner c;
        c.s = seg.breakpoints[k - 1];
        c.slope_before = seg.segments[k - 1].slope;
        c.slope_after = seg.segments[k].slope;
        c.delta = c.slope_after - c.slope_before;
        corners.push_back(c);
    }
    return corners;
}

const char* label_name(StrataLabel label) {
    switch (label) {
        case StrataLabel::Manifold: return "Manifold";
        case StrataLabel::FiberBundle: return "FiberBundle";
        case StrataLabel::Flare: return "Flare";
        case StrataLabel::Ambiguous: return "Ambiguous";
    }
    return "Unknown";
}

void write_classes_csv(const std::string& path, const std::vector<ClassRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open file for writing: " + path);
    out << "token,label,segment_count,slopes,breakpoints_s\n";
    for (const ClassRow& row : rows) {
        out << row.token << ',' << label_name(row.cls.label) << ',' << row.seg.segments.size()
            << ',';
        for (std::size_t k = 0; k < row.cls.slope_sequence.size(); ++k) {
            if (k) out << ';';
            out << text::format_double(row.cls.slope_sequence[k]);
        }
        out << ',';
        for (std::size_t k = 0; k < row.seg.breakpoints.size(); ++k) {
            if (k) out << ';';
            out << text::format_double(row.seg.breakpoints[k]);
        }
        out << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

} // namespace strata_audit::strata
