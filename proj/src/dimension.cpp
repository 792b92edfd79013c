#include "strata_audit/dimension.hpp"

#include "strata_audit/errors.hpp"
#include "strata_audit/stats.hpp"
#include "strata_audit/text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace strata_audit {

FitWindow FitWindow::radius(double r_min, double r_max) {
    if (!(r_min > 0.0) || !(r_min < r_max))
        throw ConfigError("radius window needs 0 < r_min < r_max");
    FitWindow w;
    w.mode = Mode::Radius;
    w.r_min = r_min;
    w.r_max = r_max;
    return w;
}

FitWindow FitWindow::volume(std::size_t v_min, std::size_t v_max) {
    if (v_min < 1 || v_min >= v_max) throw ConfigError("volume window needs 1 <= v_min < v_max");
    FitWindow w;
    w.mode = Mode::Volume;
    w.v_min = v_min;
    w.v_max = v_max;
    return w;
}

std::string FitWindow::describe() const {
    if (mode == Mode::Radius)
        return "radius [" + text::format_double(r_min) + ", " + text::format_double(r_max) + "]";
    return "volume [" + std::to_string(v_min) + ", " + std::to_string(v_max) + "]";
}

namespace dimension {

LineFit fit_loglog(std::span<const double> s, std::span<const double> y) {
    LineFit fit;
    const std::size_t n = s.size();
    if (n < 2) {
        fit.degenerate = true;
        return fit;
    }
    const double ms = stats::mean(s);
    const double my = stats::mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = s[i] - ms;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if (sxx == 0.0) {
        fit.degenerate = true;
        return fit;
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * ms;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * s[i]);
        sse += r * r;
    }
    fit.residual_rms = std::sqrt(sse / static_cast<double>(n));
    return fit;
}

DimensionEstimate estimate_dimension(const RadiusLadder& ladder, const FitWindow& window) {
    DimensionEstimate est;
    est.anchor = ladder.anchor;

    std::vector<double> s, y;
    const std::size_t p = ladder.radii.size();
    if (window.mode == FitWindow::Mode::Radius) {
        for (std::size_t k = 0; k < p; ++k) {
            const double r = ladder.radii[k];
            if (r <= 0.0) continue;  // duplicate token, log undefined
            if (r < window.r_min || r > window.r_max) continue;
            s.push_back(std::log(r));
            y.push_back(std::log(static_cast<double>(k + 1)));
        }
    } else {
        const std::size_t hi = std::min(window.v_max, p);
        for (std::size_t i = window.v_min; i <= hi; ++i) {
            const double r = ladder.radii[i - 1];
            if (r <= 0.0) continue;
            s.push_back(std::log(r));
            y.push_back(std::log(static_cast<double>(i)));
        }
    }

    est.points_used = s.size();
    std::size_t distinct = s.empty() ? 0 : 1;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] != s[i - 1]) ++distinct;
    if (s.size() < 3 || distinct < 2) {
        est.status = FitStatus::Insufficient;
        return est;  // n_hat reported as 0
    }
    const LineFit fit = fit_loglog(s, y);
    if (fit.degenerate) {
        est.status = FitStatus::Degenerate;
        return est;
    }
    est.status = FitStatus::Ok;
    est.n_hat = fit.slope;
    est.log_H = fit.intercept;
    est.residual_rms = fit.residual_rms;
    return est;
}

std::vector<DimensionEstimate> estimate_all(const TokenCloud& cloud, const FitWindow& window,
                                            std::size_t cap, unsigned threads) {
    if (cap == metric::kNoCap && window.mode == FitWindow::Mode::Volume) cap = window.v_max;
    std::vector<DimensionEstimate> out(cloud.n);
    parallel_for(cloud.n, threads, [&](std::size_t anchor) {
        out[anchor] = estimate_dimension(metric::radius_ladder(cloud, anchor, cap), window);
    });
    return out;
}

std::vector<DimensionEstimate> estimate_all(const std::vector<RadiusLadder>& ladders,
                                            const FitWindow& window, unsigned threads) {
    std::vector<DimensionEstimate> out(ladders.size());
    parallel_for(ladders.size(), threads,
                 [&](std::size_t i) { out[i] = estimate_dimension(ladders[i], window); });
    return out;
}

namespace {

double silverman_bandwidth(const std::vector<double>& values) {
    const double sigma = stats::stddev(values);
    const double iqr = stats::quantile(values, 0.75) - stats::quantile(values, 0.25);
    double spread = sigma;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    double h = 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
    if (!(h > 0.0)) {
        // Degenerate sample (all values equal): keep a narrow but usable kernel.
        h = std::max(1e-3, 1e-3 * std::abs(values.front()));
    }
    return h;
}

} // namespace

DimensionDistribution dimension_distribution(const std::vector<DimensionEstimate>& estimates,
                                             std::size_t bins, double kde_bandwidth) {
    if (estimates.empty()) throw ConfigError("dimension_distribution needs at least one estimate");
    if (bins < 1) throw ConfigError("dimension_distribution needs bins >= 1");

    DimensionDistribution dist;
    dist.total = estimates.size();
    std::vector<double> values;  // zeros included
    std::vector<double> ok_values;
    std::size_t zero_status = 0;
    for (const DimensionEstimate& e : estimates) {
        if (e.status == FitStatus::Ok) {
            values.push_back(e.n_hat);
            ok_values.push_back(e.n_hat);
        } else {
            values.push_back(0.0);
            ++zero_status;
        }
    }
    dist.zero_fraction = static_cast<double>(zero_status) / static_cast<double>(dist.total);

    double max_val = 0.0;
    for (double v : values) max_val = std::max(max_val, v);
    if (max_val <= 0.0) max_val = 1.0;
    dist.bin_edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b)
        dist.bin_edges[b] = max_val * static_cast<double>(b) / static_cast<double>(bins);
    dist.counts.assign(bins, 0);
    for (double v : values) {
        std::size_t b = static_cast<std::size_t>(static_cast<double>(bins) * v / max_val);
        if (b >= bins) b = bins - 1;  // right edge closes the last bin
        ++dist.counts[b];
    }
    dist.densities.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double width = dist.bin_edges[b + 1] - dist.bin_edges[b];
        dist.densities[b] =
            static_cast<double>(dist.counts[b]) / (static_cast<double>(dist.total) * width);
    }

    if (!ok_values.empty()) {
        const double h = kde_bandwidth > 0.0 ? kde_bandwidth : silverman_bandwidth(ok_values);
        dist.bandwidth = h;
        const auto [mn_it, mx_it] = std::minmax_element(ok_values.begin(), ok_values.end());
        const double lo = *mn_it - 6.0 * h;
        const double hi = *mx_it + 6.0 * h;
        const std::size_t grid = 1024;
        dist.kde_x.resize(grid + 1);
        dist.kde_density.resize(grid + 1);
        const double norm =
            1.0 / (static_cast<double>(ok_values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
        for (std::size_t g = 0; g <= grid; ++g) {
            const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid);
            double density = 0.0;
            for (double v : ok_values) {
                const double z = (x - v) / h;
                density += std::exp(-0.5 * z * z);
            }
            dist.kde_x[g] = x;
            dist.kde_density[g] = density * norm;
        }
    }
    return dist;
}

std::vector<std::string> bucket_clusters(const std::vector<DimensionEstimate>& estimates,
                                         const std::vector<ClusterRange>& ranges) {
    std::vector<ClusterRange> sorted = ranges;
    std::sort(sorted.begin(), sorted.end(),
              [](const ClusterRange& a, const ClusterRange& b) { return a.lo < b.lo; });
    for (const ClusterRange& r : sorted)
        if (r.lo > r.hi) throw ConfigError("cluster range with lo > hi");
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].lo <= sorted[i - 1].hi)
            throw ConfigError("overlapping cluster ranges");

    auto label_of = [](const ClusterRange& r) {
        if (!r.label.empty()) return r.label;
        auto fmt = [](double v) {
            if (v == std::floor(v)) return std::to_string(static_cast<long long>(v));
            return text::format_double(v);
        };
        return "[" + fmt(r.lo) + "," + fmt(r.hi) + "]";
    };

    std::vector<std::string> labels(estimates.size());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        if (estimates[i].status != FitStatus::Ok) {
            labels[i] = "ZeroBucket";
            continue;
        }
        const double rounded = std::round(estimates[i].n_hat);
        labels[i] = "Unclustered";
        for (const ClusterRange& r : sorted) {
            if (rounded >= r.lo && rounded <= r.hi) {
                labels[i] = label_of(r);
                break;
            }
        }
    }
    return labels;
}

const char* status_name(FitStatus status) {
    switch (status) {
        case FitStatus::Ok: return "Ok";
        case FitStatus::Insufficient: return "Insufficient";
        case FitStatus::Degenerate: return "Degenerate";
    }
    return "Unknown";
}

void write_dims_csv(const std::string& path, const std::vector<DimensionEstimate>& estimates,
                    const std::vector<std::string>& clusters) {
    if (!clusters.empty() && clusters.size() != estimates.size())
        throw ConfigError("cluster label count != estimate count");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot open file for writing: " + path);
    out << "token,n_hat,log_H,residual_rms,points_used,status,cluster\n";
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const DimensionEstimate& e = estimates[i];
        out << e.anchor << ',' << text::format_double(e.n_hat) << ','
            << text::format_double(e.log_H) << ',' << text::format_double(e.residual_rms) << ','
            << e.points_used << ',' << status_name(e.status) << ','
            << (clusters.empty() ? "" : clusters[i]) << '\n';
    }
    if (!out) throw ConfigError("write failed: " + path);
}

std::vector<DimensionEstimate> read_dims_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open dims CSV: " + path);
    std::vector<DimensionEstimate> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || text::trim(line).empty()) continue;
        const auto cells = text::split(text::trim(line), ',');
        if (cells.size() < 6)
            throw IngestError("dims CSV line " + std::to_string(line_no) + ": too few fields");
        DimensionEstimate e;
        const auto tok = text::parse_int(cells[0]);
        const auto n_hat = text::parse_double(cells[1]);
        const auto log_h = text::parse_double(cells[2]);
        const auto rms = text::parse_double(cells[3]);
        const auto used = text::parse_int(cells[4]);
        if (!tok || !n_hat || !log_h || !rms || !used)
            throw IngestError("dims CSV line " + std::to_string(line_no) + ": bad field");
        e.anchor = static_cast<std::size_t>(*tok);
        e.n_hat = *n_hat;
        e.log_H = *log_h;
        e.residual_rms = *rms;
        e.points_used = static_cast<std::size_t>(*used);
        const std::string_view status = cells[5];
        if (status == "Ok")
            e.status = FitStatus::Ok;
        else if (status == "Insufficient")
            e.status = FitStatus::Insufficient;
        else if (status == "Degenerate")
            e.status = FitStatus::Degenerate;
        else
            throw IngestError("dims CSV line " + std::to_string(line_no) + ": unknown status");
        out.push_back(e);
    }
    return out;
}

void write_distribution_csv(const std::string& hist_path, const std::string& kde_path,
                            const DimensionDistribution& dist) {
    {
        std::ofstream out(hist_path, std::ios::trunc);
        if (!out) throw ConfigError("cannot open file for writing: " + hist_path);
        out << "bin_lo,bin_hi,count,density,zero_fraction\n";
        for (std::size_t b = 0; b < dist.counts.size(); ++b) {
            out << text::format_double(dist.bin_edges[b]) << ','
                << text::format_double(dist.bin_edges[b + 1]) << ',' << dist.counts[b] << ','
                << text::format_double(dist.densities[b]) << ','
                << (b == 0 ? text::format_double(dist.zero_fraction) : std::string()) << '\n';
        }
    }
    {
        std::ofstream out(kde_path, std::ios::trunc);
        if (!out) throw ConfigError("cannot open file for writing: " + kde_path);
        out << "x,density\n";
        for (std::size_t g = 0; g < dist.kde_x.size(); ++g)
            out << text::format_double(dist.kde_x[g]) << ','
                << text::format_double(dist.kde_density[g]) << '\n';
    }
}

} // namespace dimension
} // namespace strata_audit
