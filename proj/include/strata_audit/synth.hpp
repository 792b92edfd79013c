#pragma once

#include "strata_audit/corpus.hpp"

#include <cstdint>
#include <vector>

namespace strata_audit {

// Target volume growth curve: natural-number slopes n_1..n_k between critical
// scales 0 < s_1 < ... < s_k (log-radius units), constant beyond s_k.
struct GrowthSpec {
    std::vector<double> critical_scales;
    std::vector<unsigned> slopes;

    std::size_t regimes() const { return slopes.size(); }
};

// Glued half-disc chain realizing a GrowthSpec. Token 0 is the base point
// (the center of the first disc); stratum_labels give each token's disc 1..k.
struct RealizationCloud {
    TokenCloud cloud;  // ExplicitOracle geodesic metric
    std::vector<std::size_t> stratum_labels;
    std::size_t base_index = 0;
};

namespace synth {

void validate_spec(const GrowthSpec& spec);

// Continuous piecewise-linear target curve: f(0) = 0, slope n_i on
// [s_{i-1}, s_i], constant at f(s_k) for s >= s_k. Throws SynthError for s < 0.
double exact_vgt(const GrowthSpec& spec, double s);

// Chain of half-discs glued zenith-to-center. Disc j has dimension n_j and
// incremental radius rho_j = e^{s_j} - e^{s_{j-1}}, so the geodesic corner
// seen from the base point lands exactly at scale s_j. Per-disc budgets and
// stratified radial depths make the count inside B(base, e^s) track e^{f(s)}
// to within one point per disc.
RealizationCloud sample_realization(const GrowthSpec& spec, std::size_t n_points,
                                    std::uint64_t seed);

// Uniform box [0, extent]^base_dim x [0, fiber_scale]^fiber_dim: a product of
// base manifold and bounded-support noise fiber, ambient Euclidean metric.
TokenCloud sample_fiber_bundle(std::size_t base_dim, std::size_t fiber_dim, double fiber_scale,
                               double extent, std::size_t n_points, std::uint64_t seed);

// Uniform samples in the closed dim-ball: direction uniform on the sphere,
// radial law r = radius * u^(1/dim).
TokenCloud sample_ball(std::size_t dim, double radius, std::size_t n_points, std::uint64_t seed);

// Metadata records for a realization: episode 0, t = token index, events
// carrying the stratum label ("stratum_<j>") plus "base" on the base token.
std::vector<TokenMeta> realization_meta(const RealizationCloud& rc);

} // namespace synth

} // namespace strata_audit
