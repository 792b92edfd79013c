#pragma once

#include "strata_audit/growth.hpp"
#include "strata_audit/metric.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace strata_audit {

// Fit-point selection: by distance range or by neighbor-count range.
struct FitWindow {
    enum class Mode { Radius, Volume };
    Mode mode = Mode::Volume;
    double r_min = 0.0, r_max = 0.0;       // Radius mode
    std::size_t v_min = 0, v_max = 0;      // Volume mode (counts, 1-based)

    static FitWindow radius(double r_min, double r_max);
    static FitWindow volume(std::size_t v_min, std::size_t v_max);
    std::string describe() const;
};

enum class FitStatus { Ok, Insufficient, Degenerate };

// Slope/intercept of the log-log least squares fit. Insufficient estimates
// report n_hat = 0 but keep their status so true zero slopes are never
// conflated with failed fits.
struct DimensionEstimate {
    std::size_t anchor = 0;
    double n_hat = 0.0;
    double log_H = 0.0;
    double residual_rms = 0.0;
    std::size_t points_used = 0;
    FitStatus status = FitStatus::Insufficient;
};

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double residual_rms = 0.0;
    bool degenerate = false;  // all abscissae equal
};

struct DimensionDistribution {
    std::vector<double> bin_edges;     // bins+1 edges over [0, max]
    std::vector<std::size_t> counts;   // per bin, zero estimates included
    std::vector<double> densities;     // counts / (total * width)
    std::vector<double> kde_x;         // empty when no Ok estimates
    std::vector<double> kde_density;
    double bandwidth = 0.0;
    double zero_fraction = 0.0;        // fraction with status != Ok
    std::size_t total = 0;
};

struct ClusterRange {
    double lo = 0.0, hi = 0.0;  // closed interval
    std::string label;
};

namespace dimension {

// Ordinary least squares of y against (1, s), centered two-pass form.
// residual_rms is sqrt(mean squared residual).
LineFit fit_loglog(std::span<const double> s, std::span<const double> y);

DimensionEstimate estimate_dimension(const RadiusLadder& ladder, const FitWindow& window);

std::vector<DimensionEstimate> estimate_all(const TokenCloud& cloud, const FitWindow& window,
                                            std::size_t cap = metric::kNoCap, unsigned threads = 0);

std::vector<DimensionEstimate> estimate_all(const std::vector<RadiusLadder>& ladders,
                                            const FitWindow& window, unsigned threads = 0);

// Histogram (zeros included) + Gaussian KDE over Ok estimates. bandwidth <= 0
// selects Silverman's rule.
DimensionDistribution dimension_distribution(const std::vector<DimensionEstimate>& estimates,
                                             std::size_t bins, double kde_bandwidth = 0.0);

// Labels each Ok estimate by the range containing round(n_hat); "Unclustered"
// when none matches, "ZeroBucket" for Insufficient estimates. Throws
// ConfigError on overlapping ranges.
std::vector<std::string> bucket_clusters(const std::vector<DimensionEstimate>& estimates,
                                         const std::vector<ClusterRange>& ranges);

// dims CSV: token,n_hat,log_H,residual_rms,points_used,status,cluster.
void write_dims_csv(const std::string& path, const std::vector<DimensionEstimate>& estimates,
                    const std::vector<std::string>& clusters = {});
std::vector<DimensionEstimate> read_dims_csv(const std::string& path);

void write_distribution_csv(const std::string& hist_path, const std::string& kde_path,
                            const DimensionDistribution& dist);

const char* status_name(FitStatus status);

} // namespace dimension

} // namespace strata_audit
