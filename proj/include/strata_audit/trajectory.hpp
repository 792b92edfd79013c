#pragma once

#include "strata_audit/corpus.hpp"
#include "strata_audit/dimension.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace strata_audit {

struct TraceEntry {
    std::int64_t timestep = 0;
    std::size_t token = 0;
    double n_hat = 0.0;
    FitStatus status = FitStatus::Insufficient;
    std::vector<std::string> events;
};

// One episode's local-dimension series, time-ordered. Stats cover Ok entries
// only; Insufficient entries are holes, never interpolated.
struct EpisodeTrace {
    std::int64_t episode_id = 0;
    std::vector<TraceEntry> series;
    double median = 0.0;
    double mad = 0.0;  // unscaled median absolute deviation
    double max = 0.0;
    std::int64_t argmax_timestep = 0;
};

struct Spike {
    std::int64_t timestep = 0;
    double n_hat = 0.0;
    double z_robust = 0.0;
};

struct SpikeReport {
    std::int64_t episode_id = 0;
    std::vector<Spike> spikes;
    double threshold = 0.0;  // median + theta * scale
    double scale = 0.0;      // 1.4826*MAD, or the fallback scale when MAD = 0
};

struct AlignmentRow {
    std::int64_t spike_timestep = 0;
    std::string event;
    std::int64_t event_timestep = 0;
    std::int64_t lag = 0;  // event_timestep - spike_timestep
};

struct AlignmentTable {
    std::vector<AlignmentRow> rows;
    double event_fraction = 0.0;  // tagged steps with a spike within the window
    double mean_lag = 0.0;        // over matched spikes
    std::size_t matched_spikes = 0;
};

namespace trajectory {

// Groups estimates by episode and orders by timestep. Throws TraceError when
// metadata is missing or the estimate list does not cover every token.
std::vector<EpisodeTrace> episode_series(const std::vector<DimensionEstimate>& estimates,
                                         const std::vector<TokenMeta>& meta);

// Spike: a strict local maximum (both series neighbors Ok) with
// n_hat > median + theta * scale, scale = 1.4826 * MAD. When MAD is zero the
// scale falls back to 1.2533 * mean absolute deviation about the median.
SpikeReport detect_spikes(const EpisodeTrace& trace, double theta = 3.0);

// Nearest tagged event within +-window_steps of each spike, and the fraction
// of tagged steps that have a spike in-window.
AlignmentTable event_alignment(const SpikeReport& report, const EpisodeTrace& trace,
                               std::int64_t window_steps);

// traces JSON: array with one object per episode (series, stats, spikes,
// alignment).
void write_traces_json(const std::string& path, const std::vector<EpisodeTrace>& traces,
                       const std::vector<SpikeReport>& reports,
                       const std::vector<AlignmentTable>& alignments);

} // namespace trajectory

} // namespace strata_audit
