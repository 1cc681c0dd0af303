#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sadp/model.hpp"
#include "sadp/policy.hpp"

namespace sadp {

struct SimConfig {
    SystemParams params;
    DispatchPolicy policy;
    std::int64_t n_jobs = 1000000;
    std::int64_t warmup_jobs = -1;  // -1: 10% of n_jobs
    std::uint64_t seed = 1;
    std::vector<double> size_bins;  // edges; empty: 0, 0.25, ..., 6, inf
};

struct JobRecord {
    double size;
    double wait;
    int rank;  // 1 = shortest queue at decision time ... m = longest
};

struct BinStats {
    double lo = 0.0, hi = 0.0;
    std::int64_t count = 0;
    double mean_wait = 0.0;               // only meaningful when count > 0
    std::vector<double> rank_fractions;   // length m, sums to 1 for nonempty bins
};

struct SimStats {
    double mean_wait = 0.0;
    double ci_half_width = 0.0;  // 95%, batch means
    std::int64_t jobs_counted = 0;
    std::vector<BinStats> bins;  // empty bins are dropped, not reported as zero
    double work_conservation_error = 0.0;  // relative, should be ~1e-16
    bool unstable = false;                 // offered load >= 1
};

std::vector<double> default_size_bins();

/// Rank of the chosen server's backlog among all backlogs, 1-based; ties
/// share the best (lowest) rank.
int rank_of_choice(std::span<const double> backlogs, int chosen);

/// Bin (size, wait, rank) records: per-bin mean waits and the fraction of
/// jobs dispatched to each queue rank. Bin k covers [edges[k], edges[k+1]);
/// a final open bin [edges.back(), inf) is added automatically.
std::vector<BinStats> conditional_stats(std::span<const JobRecord> records,
                                        std::span<const double> edges, int m);

/// Lindley-recursion simulation: per arrival, age all backlogs by the
/// inter-arrival time (clamped at zero), dispatch, record the chosen
/// backlog as the waiting time, add the job size. Deterministic in seed;
/// traffic streams are independent of the policy's randomness, so compared
/// policies see identical arrivals.
SimStats run_sim(const SimConfig& cfg,
                 const std::function<void(const JobRecord&)>& record_sink = {});

}  // namespace sadp
