#include "strata_audit/synth.hpp"

#include "strata_audit/errors.hpp"
#include "strata_audit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace strata_audit::synth {

namespace {

// Unit direction via normalized gaussians; upper half-space when half=true.
std::vector<double> sample_direction(Rng& rng, std::size_t dim, bool half) {
    std::vector<double> v(dim);
    while (true) {
        double norm2 = 0.0;
        for (double& x : v) {
            x = rng.gaussian();
            norm2 += x * x;
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& x : v) x *= inv;
            break;
        }
    }
    if (half && v[dim - 1] < 0.0) v[dim - 1] = -v[dim - 1];
    return v;
}

// Geometry shared by the oracle closure: per-token disc index and coordinates
// relative to that disc's center, plus cumulative radii of the chain.
struct RealizationGeometry {
    std::vector<std::size_t> disc;          // 1..k per token (token 0 = base, disc 1)
    std::vector<std::size_t> offset;        // into coords
    std::vector<double> coords;
    std::vector<unsigned> dims;             // disc dimensions n_j
    std::vector<double> rho;                // incremental radii
    std::vector<double> cum_rho;            // cum_rho[j] = rho_1 + ... + rho_j = r_j

    double distance(std::size_t a, std::size_t b) const {
        if (a == b) return 0.0;
        std::size_t i = a, j = b;
        if (disc[i] > disc[j]) std::swap(i, j);
        const std::size_t di = disc[i], dj = disc[j];
        const double* pi = coords.data() + offset[i];
        const double* pj = coords.data() + offset[j];
        if (di == dj) {
            double acc = 0.0;
            for (std::size_t c = 0; c < dims[di - 1]; ++c) {
                const double diff = pi[c] - pj[c];
                acc += diff * diff;
            }
            return std::sqrt(acc);
        }
        // Through the gluing chain: x -> zenith_i -> ... -> center_j -> y.
        double to_zenith = 0.0;
        for (std::size_t c = 0; c < dims[di - 1]; ++c) {
            const double zc = (c + 1 == dims[di - 1]) ? rho[di - 1] : 0.0;
            const double diff = pi[c] - zc;
            to_zenith += diff * diff;
        }
        double from_center = 0.0;
        for (std::size_t c = 0; c < dims[dj - 1]; ++c) from_center += pj[c] * pj[c];
        const double between = cum_rho[dj - 1 - 1] - cum_rho[di - 1];  // rho_{i+1}+...+rho_{j-1}
        return std::sqrt(to_zenith) + between + std::sqrt(from_center);
    }
};

} // namespace

void validate_spec(const GrowthSpec& spec) {
    const std::size_t k = spec.regimes();
    if (k < 1) throw SynthError("growth spec needs at least one regime");
    if (spec.critical_scales.size() != k)
        throw SynthError("growth spec: scales and slopes must have equal length");
    double prev = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (!(spec.critical_scales[i] > prev))
            throw SynthError("growth spec: critical scales must be strictly increasing and > 0");
        prev = spec.critical_scales[i];
        if (spec.slopes[i] < 1) throw SynthError("growth spec: slopes must be >= 1");
    }
}

double exact_vgt(const GrowthSpec& spec, double s) {
    validate_spec(spec);
    if (s < 0.0) throw SynthError("exact_vgt domain is s >= 0");
    double f = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < spec.regimes(); ++i) {
        const double si = spec.critical_scales[i];
        if (s <= si) return f + spec.slopes[i] * (s - prev);
        f += spec.slopes[i] * (si - prev);
        prev = si;
    }
    return f;  // constant beyond the last critical scale
}

RealizationCloud sample_realization(const GrowthSpec& spec, std::size_t n_points,
                                    std::uint64_t seed) {
    validate_spec(spec);
    const std::size_t k = spec.regimes();
    if (n_points < k + 1)
        throw SynthError("n_points must be at least " + std::to_string(k + 1) +
                         " (one per disc plus the base point)");

    std::vector<double> r(k);  // r_j = e^{s_j}
    for (std::size_t j = 0; j < k; ++j) r[j] = std::exp(spec.critical_scales[j]);

    // Per-disc mass e^{f(s_j)} - e^{f(s_{j-1})}, with the mass below the first
    // scale folded into disc 1 so the count tracks e^f rather than e^f - 1.
    std::vector<double> weight(k);
    double prev_mass = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double mass = std::exp(exact_vgt(spec, spec.critical_scales[j]));
        weight[j] = mass - prev_mass;
        prev_mass = mass;
    }
    const double total_weight = prev_mass;

    // Largest-remainder rounding of the n_points-1 sampled tokens.
    const std::size_t samples = n_points - 1;
    std::vector<std::size_t> budget(k);
    std::vector<std::pair<double, std::size_t>> remainder(k);
    std::size_t assigned = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const double exact = static_cast<double>(samples) * weight[j] / total_weight;
        budget[j] = static_cast<std::size_t>(exact);
        remainder[j] = {exact - static_cast<double>(budget[j]), j};
        assigned += budget[j];
    }
    std::sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t idx = 0; assigned < samples; ++idx, ++assigned) ++budget[remainder[idx % k].second];
    for (std::size_t j = 0; j < k; ++j)
        if (budget[j] == 0)
            throw SynthError("disc " + std::to_string(j + 1) +
                             " received no points; increase n_points");

    auto geom = std::make_shared<RealizationGeometry>();
    geom->dims = spec.slopes;
    geom->rho.resize(k);
    geom->cum_rho.resize(k);
    double prev_r = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        geom->rho[j] = r[j] - prev_r;
        geom->cum_rho[j] = r[j];
        prev_r = r[j];
    }

    Rng rng(seed);
    // Base point: center of disc 1, all-zero coordinates.
    geom->disc.push_back(1);
    geom->offset.push_back(geom->coords.size());
    geom->coords.insert(geom->coords.end(), spec.slopes[0], 0.0);
    std::vector<std::size_t> labels{1};

    for (std::size_t j = 0; j < k; ++j) {
        const unsigned dim = spec.slopes[j];
        const double r_lo = j == 0 ? 0.0 : r[j - 1];
        const double lo_pow = std::pow(r_lo, static_cast<double>(dim));
        const double hi_pow = std::pow(r[j], static_cast<double>(dim));
        for (std::size_t m = 0; m < budget[j]; ++m) {
            // Stratified inverse-CDF depth: the count of disc-j tokens within
            // base-distance r stays within one point of its expectation.
            const double u =
                (static_cast<double>(m) + rng.uniform()) / static_cast<double>(budget[j]);
            const double depth =
                std::pow(lo_pow + u * (hi_pow - lo_pow), 1.0 / static_cast<double>(dim)) - r_lo;
            std::vector<double> dir = sample_direction(rng, dim, /*half=*/j > 0);
            geom->disc.push_back(j + 1);
            geom->offset.push_back(geom->coords.size());
            for (double c : dir) geom->coords.push_back(c * depth);
            labels.push_back(j + 1);
        }
    }

    // Seeded shuffle of the sampled tokens; the base point stays at index 0.
    const std::size_t n = geom->disc.size();
    for (std::size_t i = n - 1; i >= 2; --i) {
        const std::size_t pick = 1 + static_cast<std::size_t>(rng.below(i));
        std::swap(geom->disc[i], geom->disc[pick]);
        std::swap(geom->offset[i], geom->offset[pick]);
        std::swap(labels[i], labels[pick]);
    }

    RealizationCloud rc;
    rc.base_index = 0;
    rc.stratum_labels = std::move(labels);
    rc.cloud.n = n;
    rc.cloud.d = 0;
    rc.cloud.metric = MetricKind::ExplicitOracle;
    rc.cloud.oracle = [geom](std::size_t a, std::size_t b) { return geom->distance(a, b); };
    rc.cloud.id = "realization";
    return rc;
}

TokenCloud sample_fiber_bundle(std::size_t base_dim, std::size_t fiber_dim, double fiber_scale,
                               double extent, std::size_t n_points, std::uint64_t seed) {
    if (base_dim < 1 || fiber_dim < 1) throw SynthError("base_dim and fiber_dim must be >= 1");
    if (!(extent > 0.0) || !(fiber_scale > 0.0) || fiber_scale > extent)
        throw SynthError("need 0 < fiber_scale <= extent");
    if (n_points < 1) throw SynthError("n_points must be >= 1");

    TokenCloud cloud;
    cloud.n = n_points;
    cloud.d = base_dim + fiber_dim;
    cloud.coords.resize(cloud.n * cloud.d);
    cloud.id = "bundle";
    Rng rng(seed);
    for (std::size_t i = 0; i < n_points; ++i) {
        double* row = cloud.coords.data() + i * cloud.d;
        for (std::size_t c = 0; c < base_dim; ++c) row[c] = rng.uniform(0.0, extent);
        for (std::size_t c = 0; c < fiber_dim; ++c) row[base_dim + c] = rng.uniform(0.0, fiber_scale);
    }
    return cloud;
}

TokenCloud sample_ball(std::size_t dim, double radius, std::size_t n_points, std::uint64_t seed) {
    if (dim < 1) throw SynthError("dim must be >= 1");
    if (!(radius > 0.0)) throw SynthError("radius must be > 0");
    if (n_points < 1) throw SynthError("n_points must be >= 1");

    TokenCloud cloud;
    cloud.n = n_points;
    cloud.d = dim;
    cloud.coords.resize(cloud.n * cloud.d);
    cloud.id = "ball";
    Rng rng(seed);
    for (std::size_t i = 0; i < n_points; ++i) {
        const std::vector<double> dir = sample_direction(rng, dim, /*half=*/false);
        const double rr = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(dim));
        double* row = cloud.coords.data() + i * cloud.d;
        for (std::size_t c = 0; c < dim; ++c) row[c] = dir[c] * rr;
    }
    return cloud;
}

std::vector<TokenMeta> realization_meta(const RealizationCloud& rc) {
    std::vector<TokenMeta> meta(rc.cloud.n);
    for (std::size_t i = 0; i < rc.cloud.n; ++i) {
        meta[i].episode_id = 0;
        meta[i].timestep = static_cast<std::int64_t>(i);
        meta[i].events.push_back("stratum_" + std::to_string(rc.stratum_labels[i]));
        if (i == rc.base_index) meta[i].events.push_back("base");
        std::sort(meta[i].events.begin(), meta[i].events.end());
    }
    return meta;
}

} // namespace strata_audit::synth
