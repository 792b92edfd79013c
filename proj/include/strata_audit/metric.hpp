#pragma once

#include "strata_audit/corpus.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace strata_audit {

// Sorted distances from one anchor to all other tokens. Exact ties (general
// position violated) are kept, broken by token index, and flagged; zero
// distances (duplicate tokens) are kept and counted.
struct RadiusLadder {
    std::size_t anchor = 0;
    std::vector<double> radii;  // ascending
    bool has_ties = false;
    std::size_t zero_count = 0;

    std::size_t p() const { return radii.size(); }
};

namespace metric {

inline constexpr std::size_t kNoCap = std::numeric_limits<std::size_t>::max();

double distance(const TokenCloud& cloud, std::size_t i, std::size_t j);

// Exact brute-force ladder; cap truncates to the cap nearest tokens.
RadiusLadder radius_ladder(const TokenCloud& cloud, std::size_t anchor, std::size_t cap = kNoCap);

// |{y != anchor : d(anchor, y) <= r}| by direct loop (closed ball).
std::size_t range_count(const TokenCloud& cloud, std::size_t anchor, double r);

// Count via binary search into a precomputed full ladder.
std::size_t range_count(const RadiusLadder& ladder, double r);

// One ladder per token, parallel over anchors. Output order is token order
// and results are identical to sequential per-anchor calls.
std::vector<RadiusLadder> all_ladders(const TokenCloud& cloud, std::size_t cap = kNoCap,
                                      unsigned threads = 0);

// Samples pairs/triples of an oracle metric and checks d(x,x)=0, symmetry,
// nonnegativity and the triangle inequality within tol. Throws LadderError.
void audit_oracle(const TokenCloud& cloud, std::size_t samples, double tol,
                  std::uint64_t seed = 1);

// Ladder cache: consecutive binary records
//   anchor (u64 LE), p (u64 LE), radii (p x f64 LE).
void write_ladder_cache(const std::string& path, const std::vector<RadiusLadder>& ladders);
std::vector<RadiusLadder> read_ladder_cache(const std::string& path);

} // namespace metric

// Runs fn(i) for i in [0, n) on `threads` workers (0 = worker count from
// STRATA_AUDIT_THREADS or hardware concurrency). fn must write only to
// per-index state.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

unsigned resolve_thread_count(unsigned requested);

} // namespace strata_audit
