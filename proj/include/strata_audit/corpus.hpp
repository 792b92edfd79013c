#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace strata_audit {

// Per-token trajectory metadata. Within one episode, timesteps are unique.
struct TokenMeta {
    std::int64_t episode_id = 0;
    std::int64_t timestep = 0;
    std::vector<std::string> events;  // sorted, deduplicated tags
    std::optional<std::string> thumbnail;
};

enum class MetricKind { AmbientEuclidean, ExplicitOracle };

// N embedding points plus optional per-token metadata. Coordinates are always
// held as 64-bit floats; 32-bit files are widened on load. A loaded cloud is
// immutable and safe to share across threads.
struct TokenCloud {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> coords;  // row-major n*d; empty for oracle clouds
    MetricKind metric = MetricKind::AmbientEuclidean;
    std::function<double(std::size_t, std::size_t)> oracle;  // set iff ExplicitOracle
    std::vector<TokenMeta> meta;  // empty, or exactly n records
    std::string id;

    bool has_meta() const { return !meta.empty(); }
    std::span<const double> row(std::size_t i) const {
        return {coords.data() + i * d, d};
    }
};

namespace corpus {

// NPY v1.0, little-endian f4/f8, C-order, rank 2. f4 payloads are widened.
TokenCloud load_array_file(const std::string& path);
void write_array_file(const std::string& path, const TokenCloud& cloud);

// Rectangular numeric CSV, optional single header line.
TokenCloud load_csv(const std::string& path, bool has_header);
void write_csv(const std::string& path, const TokenCloud& cloud, bool write_header);

// Metadata: one JSON object per line with keys token, episode, t,
// events (optional), thumbnail (optional). Records must cover tokens 0..N-1
// exactly once, and (episode, t) pairs must be unique.
TokenCloud attach_meta(TokenCloud cloud, const std::string& meta_path);
std::vector<TokenMeta> load_meta_records(const std::string& meta_path, std::size_t expected_n);
void write_meta(const std::string& path, const std::vector<TokenMeta>& meta);

// Throws if invariants are violated (finite coordinates, meta length, ...).
void validate(const TokenCloud& cloud);

// Uniform isotropic scaling; used by the scale-invariance checks.
TokenCloud scaled(const TokenCloud& cloud, double lambda);

} // namespace corpus

} // namespace strata_audit
