#pragma once

#include "strata_audit/growth.hpp"

#include <string>
#include <vector>

namespace strata_audit {

struct SegmentFit {
    double s_lo = 0.0, s_hi = 0.0;
    double slope = 0.0, intercept = 0.0;
    double sse = 0.0;
    std::size_t first = 0;  // sample range [first, first+count)
    std::size_t count = 0;
};

// Piecewise-linear least-squares segmentation of one growth curve.
// total_cost = sum of segment SSEs + penalty * segment count.
struct Segmentation {
    std::size_t anchor = 0;
    std::vector<double> breakpoints;  // s at the first sample of each later segment
    std::vector<SegmentFit> segments;
    double total_cost = 0.0;
    double penalty = 0.0;
};

enum class StrataLabel { Manifold, FiberBundle, Flare, Ambiguous };

struct Corner {
    double s = 0.0;
    double slope_before = 0.0;
    double slope_after = 0.0;
    double delta = 0.0;  // slope_after - slope_before
};

struct StrataClass {
    StrataLabel label = StrataLabel::Manifold;
    std::vector<double> slope_sequence;
    std::vector<Corner> evidence;
};

struct SegmentOptions {
    std::size_t max_segments = 5;
    // <= 0 selects the BIC-like default 2 * sigma^2 * log(p) with sigma^2
    // taken from the single-segment residual.
    double penalty = -1.0;
    std::size_t min_seg_len = 3;
    // Candidate breakpoints are thinned to at most this many positions for
    // long curves; curves at or below this size are segmented exactly.
    std::size_t max_candidates = 512;
};

namespace strata {

// Exact dynamic-programming segmentation over candidate breakpoints at sample
// abscissae. Throws SegmentError for curves with fewer than 4 samples.
Segmentation segment_curve(const GrowthCurve& curve, const SegmentOptions& opts = {});
Segmentation segment_curve(const GrowthCurve& curve, std::size_t max_segments, double penalty);

// Manifold: one segment or all slope changes within tolerance.
// FiberBundle: every change is a decrease beyond tolerance.
// Flare: some change is an increase beyond tolerance.
// Ambiguous: mixed significant decreases and in-tolerance changes.
StrataClass classify_token(const Segmentation& seg, double slope_tol = 0.5);

std::vector<Corner> corner_report(const Segmentation& seg);

const char* label_name(StrataLabel label);

struct ClassRow {
    std::size_t token = 0;
    StrataClass cls;
    Segmentation seg;
};

// classes CSV: token,label,segment_count,slopes,breakpoints_s
// (slopes and breakpoints are ';'-joined).
void write_classes_csv(const std::string& path, const std::vector<ClassRow>& rows);

} // namespace strata

} // namespace strata_audit
