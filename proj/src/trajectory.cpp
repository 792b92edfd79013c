#include "strata_audit/trajectory.hpp"

#include "strata_audit/errors.hpp"
#include "strata_audit/stats.hpp"
#include "strata_audit/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace strata_audit::trajectory {

std::vector<EpisodeTrace> episode_series(const std::vector<DimensionEstimate>& estimates,
                                         const std::vector<TokenMeta>& meta) {
    if (meta.empty()) throw TraceError("no metadata attached");
    if (estimates.size() != meta.size())
        throw TraceError("estimate count (" + std::to_string(estimates.size()) +
                         ") != metadata count (" + std::to_string(meta.size()) + ")");

    std::map<std::int64_t, std::vector<TraceEntry>> by_episode;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        TraceEntry entry;
        entry.timestep = meta[i].timestep;
        entry.token = i;
        entry.n_hat = estimates[i].status == FitStatus::Ok ? estimates[i].n_hat : 0.0;
        entry.status = estimates[i].status;
        entry.events = meta[i].events;
        by_episode[meta[i].episode_id].push_back(std::move(entry));
    }

    std::vector<EpisodeTrace> traces;
    traces.reserve(by_episode.size());
    for (auto& [episode_id, series] : by_episode) {
        std::sort(series.begin(), series.end(),
                  [](const TraceEntry& a, const TraceEntry& b) { return a.timestep < b.timestep; });
        EpisodeTrace trace;
        trace.episode_id = episode_id;
        trace.series = std::move(series);
        std::vector<double> ok;
        for (const TraceEntry& e : trace.series)
            if (e.status == FitStatus::Ok) ok.push_back(e.n_hat);
        if (!ok.empty()) {
            trace.median = stats::median(ok);
            trace.mad = stats::mad(ok);
            trace.max = *std::max_element(ok.begin(), ok.end());
            for (const TraceEntry& e : trace.series)
                if (e.status == FitStatus::Ok && e.n_hat == trace.max) {
                    trace.argmax_timestep = e.timestep;
                    break;
                }
        }
        traces.push_back(std::move(trace));
    }
    return traces;
}

SpikeReport detect_spikes(const EpisodeTrace& trace, double theta) {
    if (!(theta > 0.0)) throw ConfigError("theta must be > 0");
    std::vector<double> ok;
    for (const TraceEntry& e : trace.series)
        if (e.status == FitStatus::Ok) ok.push_back(e.n_hat);
    if (ok.size() < 5) throw TraceError("need at least 5 Ok entries to detect spikes");

    const double med = stats::median(ok);
    double scale = 1.4826 * stats::mad(ok);
    if (scale == 0.0) {
        // Tied-median series: MAD collapses to zero even with clear outliers.
        // Fall back to the mean absolute deviation (consistency factor 1.2533).
        double sum = 0.0;
        for (double v : ok) sum += std::abs(v - med);
        scale = 1.2533 * sum / static_cast<double>(ok.size());
    }

    SpikeReport report;
    report.episode_id = trace.episode_id;
    report.scale = scale;
    report.threshold = med + theta * scale;
    // A strict local maximum needs both immediate series neighbors present and
    // Ok; Insufficient holes break adjacency rather than being filled.
    for (std::size_t i = 1; i + 1 < trace.series.size(); ++i) {
        const TraceEntry& prev = trace.series[i - 1];
        const TraceEntry& cur = trace.series[i];
        const TraceEntry& next = trace.series[i + 1];
        if (cur.status != FitStatus::Ok || prev.status != FitStatus::Ok ||
            next.status != FitStatus::Ok)
            continue;
        if (!(cur.n_hat > prev.n_hat && cur.n_hat > next.n_hat)) continue;
        if (!(cur.n_hat > report.threshold)) continue;
        Spike spike;
        spike.timestep = cur.timestep;
        spike.n_hat = cur.n_hat;
        spike.z_robust = scale > 0.0 ? (cur.n_hat - med) / scale : 0.0;
        report.spikes.push_back(spike);
    }
    return report;
}

AlignmentTable event_alignment(const SpikeReport& report, const EpisodeTrace& trace,
                               std::int64_t window_steps) {
    AlignmentTable table;
    std::vector<std::pair<std::int64_t, std::string>> events;
    for (const TraceEntry& e : trace.series)
        for (const std::string& tag : e.events) events.emplace_back(e.timestep, tag);
    if (events.empty()) return table;

    std::int64_t lag_sum = 0;
    for (const Spike& spike : report.spikes) {
        const std::pair<std::int64_t, std::string>* best = nullptr;
        for (const auto& ev : events) {
            const std::int64_t lag = ev.first - spike.timestep;
            if (std::llabs(lag) > window_steps) continue;
            if (best == nullptr || std::llabs(lag) < std::llabs(best->first - spike.timestep))
                best = &ev;
        }
        if (best != nullptr) {
            AlignmentRow row;
            row.spike_timestep = spike.timestep;
            row.event = best->second;
            row.event_timestep = best->first;
            row.lag = best->first - spike.timestep;
            table.rows.push_back(row);
            lag_sum += row.lag;
            ++table.matched_spikes;
        }
    }
    std::size_t covered = 0;
    for (const auto& ev : events) {
        for (const Spike& spike : report.spikes) {
            if (std::llabs(ev.first - spike.timestep) <= window_steps) {
                ++covered;
                break;
            }
        }
    }
    table.event_fraction = static_cast<double>(covered) / static_cast<double>(events.size());
    if (table.matched_spikes > 0)
        table.mean_lag = static_cast<double>(lag_sum) / static_cast<double>(table.matched_spikes);
    return table;
}

void write_traces_json(const std::string& path, const std::vector<EpisodeTrace>& traces,
                       const std::vector<SpikeReport>& reports,
                       const std::vector<AlignmentTable>& alignments) {
    if (traces.size() != reports.size() || traces.size() != alignments.size())
        throw TraceError("traces/reports/alignments size mismatch");
    nlohmann::ordered_json root = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const EpisodeTrace& trace = traces[i];
        nlohmann::ordered_json ep;
        ep["episode"] = trace.episode_id;
        ep["series"] = nlohmann::ordered_json::array();
        for (const TraceEntry& e : trace.series) {
            nlohmann::ordered_json row;
            row["t"] = e.timestep;
            row["token"] = e.token;
            row["n_hat"] = e.n_hat;
            row["status"] = dimension::status_name(e.status);
            if (!e.events.empty()) row["events"] = e.events;
            ep["series"].push_back(std::move(row));
        }
        ep["stats"] = {{"median", trace.median},
                       {"mad", trace.mad},
                       {"max", trace.max},
                       {"argmax_t", trace.argmax_timestep}};
        ep["spikes"] = nlohmann::ordered_json::array();
        for (const Spike& s : reports[i].spikes)
            ep["spikes"].push_back(
                {{"t", s.timestep}, {"n_hat", s.n_hat}, {"z_robust", s.z_robust}});
        ep["threshold"] = reports[i].threshold;
        nlohmann::ordered_json align;
        align["rows"] = nlohmann::ordered_json::array();
        for (const AlignmentRow& row : alignments[i].rows)
            align["rows"].push_back({{"spike_t", row.spike_timestep},
                                     {"event", row.event},
                                     {"event_t", row.event_timestep},
                                     {"lag", row.lag}});
        align["event_fraction"] = alignments[i].event_fraction;
        align["mean_lag"] = alignments[i].mean_lag;
        ep["alignment"] = std::move(align);
        root.push_back(std::move(ep));
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw TraceError("cannot open file for writing: " + path);
    out << root.dump(2) << '\n';
    if (!out) throw TraceError("write failed: " + path);
}

} // namespace strata_audit::trajectory
