#include "strata_audit/metric.hpp"

#include "strata_audit/errors.hpp"
#include "strata_audit/kernels.hpp"
#include "strata_audit/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <thread>

static_assert(std::endian::native == std::endian::little,
              "ladder cache and array IO assume a little-endian host");

namespace strata_audit {

unsigned resolve_thread_count(unsigned requested) {
    if (const char* env = std::getenv("STRATA_AUDIT_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    if (requested >= 1) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw >= 1 ? hw : 1;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = std::min<std::size_t>(resolve_thread_count(threads), n ? n : 1);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    break;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

namespace metric {

namespace {

void check_index(const TokenCloud& cloud, std::size_t i) {
    if (i >= cloud.n)
        throw LadderError("token index " + std::to_string(i) + " out of range (N=" +
                          std::to_string(cloud.n) + ")");
}

// Distances from anchor to every token (self slot included, set to 0).
std::vector<double> anchor_distances(const TokenCloud& cloud, std::size_t anchor) {
    std::vector<double> dist(cloud.n);
    if (cloud.metric == MetricKind::AmbientEuclidean) {
        kernels::sqdist_one_to_many(cloud.coords.data() + anchor * cloud.d, cloud.coords.data(),
                                    cloud.n, cloud.d, dist.data());
        for (double& v : dist) v = std::sqrt(v);
    } else {
        for (std::size_t j = 0; j < cloud.n; ++j)
            dist[j] = j == anchor ? 0.0 : cloud.oracle(anchor, j);
    }
    dist[anchor] = 0.0;
    return dist;
}

RadiusLadder ladder_from_distances(std::vector<double> dist, std::size_t anchor, std::size_t cap) {
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(anchor));
    const std::size_t keep = std::min(cap, dist.size());
    if (keep < dist.size()) {
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(keep), dist.end());
        dist.resize(keep);
    }
    std::sort(dist.begin(), dist.end());

    RadiusLadder ladder;
    ladder.anchor = anchor;
    ladder.radii = std::move(dist);
    for (std::size_t k = 0; k < ladder.radii.size(); ++k) {
        if (ladder.radii[k] == 0.0) ++ladder.zero_count;
        if (k > 0 && ladder.radii[k] == ladder.radii[k - 1]) ladder.has_ties = true;
    }
    return ladder;
}

} // namespace

double distance(const TokenCloud& cloud, std::size_t i, std::size_t j) {
    check_index(cloud, i);
    check_index(cloud, j);
    if (i == j) return 0.0;
    if (cloud.metric == MetricKind::AmbientEuclidean) {
        return std::sqrt(kernels::active_sqdist()(cloud.coords.data() + i * cloud.d,
                                                  cloud.coords.data() + j * cloud.d, cloud.d));
    }
    return cloud.oracle(i, j);
}

RadiusLadder radius_ladder(const TokenCloud& cloud, std::size_t anchor, std::size_t cap) {
    check_index(cloud, anchor);
    if (cloud.n < 2) throw LadderError("radius ladder needs N >= 2");
    return ladder_from_distances(anchor_distances(cloud, anchor), anchor, cap);
}

std::size_t range_count(const TokenCloud& cloud, std::size_t anchor, double r) {
    check_index(cloud, anchor);
    if (r < 0.0) return 0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < cloud.n; ++j) {
        if (j == anchor) continue;
        if (distance(cloud, anchor, j) <= r) ++count;
    }
    return count;
}

std::size_t range_count(const RadiusLadder& ladder, double r) {
    return static_cast<std::size_t>(
        std::upper_bound(ladder.radii.begin(), ladder.radii.end(), r) - ladder.radii.begin());
}

std::vector<RadiusLadder> all_ladders(const TokenCloud& cloud, std::size_t cap, unsigned threads) {
    if (cloud.n < 2) throw LadderError("radius ladder needs N >= 2");
    std::vector<RadiusLadder> out(cloud.n);
    parallel_for(cloud.n, threads, [&](std::size_t anchor) {
        out[anchor] = ladder_from_distances(anchor_distances(cloud, anchor), anchor, cap);
    });
    return out;
}

void audit_oracle(const TokenCloud& cloud, std::size_t samples, double tol, std::uint64_t seed) {
    Rng rng(seed);
    auto pick = [&] { return static_cast<std::size_t>(rng.below(cloud.n)); };
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t i = pick(), j = pick(), k = pick();
        const double dij = distance(cloud, i, j);
        const double dji = distance(cloud, j, i);
        const double dii = distance(cloud, i, i);
        if (dii != 0.0) throw LadderError("metric audit: d(x,x) != 0");
        if (dij < 0.0) throw LadderError("metric audit: negative distance");
        if (std::abs(dij - dji) > tol) throw LadderError("metric audit: asymmetric distance");
        const double dik = distance(cloud, i, k);
        const double dkj = distance(cloud, k, j);
        if (dij > dik + dkj + tol) throw LadderError("metric audit: triangle inequality violated");
    }
}

void write_ladder_cache(const std::string& path, const std::vector<RadiusLadder>& ladders) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw LadderError("cannot open file for writing: " + path);
    for (const RadiusLadder& ladder : ladders) {
        const std::uint64_t anchor = ladder.anchor;
        const std::uint64_t p = ladder.radii.size();
        out.write(reinterpret_cast<const char*>(&anchor), 8);
        out.write(reinterpret_cast<const char*>(&p), 8);
        out.write(reinterpret_cast<const char*>(ladder.radii.data()),
                  static_cast<std::streamsize>(p * 8));
    }
    if (!out) throw LadderError("write failed: " + path);
}

std::vector<RadiusLadder> read_ladder_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LadderError("cannot open ladder cache: " + path);
    std::vector<RadiusLadder> ladders;
    while (true) {
        std::uint64_t anchor = 0, p = 0;
        in.read(reinterpret_cast<char*>(&anchor), 8);
        if (in.gcount() == 0 && in.eof()) break;
        if (in.gcount() != 8) throw LadderError("truncated ladder cache record: " + path);
        in.read(reinterpret_cast<char*>(&p), 8);
        if (in.gcount() != 8) throw LadderError("truncated ladder cache record: " + path);
        RadiusLadder ladder;
        ladder.anchor = static_cast<std::size_t>(anchor);
        ladder.radii.resize(static_cast<std::size_t>(p));
        in.read(reinterpret_cast<char*>(ladder.radii.data()), static_cast<std::streamsize>(p * 8));
        if (in.gcount() != static_cast<std::streamsize>(p * 8))
            throw LadderError("truncated ladder cache record: " + path);
        for (std::size_t k = 0; k < ladder.radii.size(); ++k) {
            const double r = ladder.radii[k];
            if (!std::isfinite(r) || r < 0.0) throw LadderError("invalid radius in cache: " + path);
            if (k > 0 && ladder.radii[k - 1] > r)
                throw LadderError("unsorted radii in cache: " + path);
            if (r == 0.0) ++ladder.zero_count;
            if (k > 0 && ladder.radii[k - 1] == r) ladder.has_ties = true;
        }
        ladders.push_back(std::move(ladder));
    }
    return ladders;
}

} // namespace metric
} // namespace strata_audit
