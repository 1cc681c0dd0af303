#include "sadp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace sadp {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent substream k of a master seed.
std::mt19937_64 substream(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t s = seed ^ (0xa0761d6478bd642fULL * (k + 1));
    return std::mt19937_64(splitmix64(s));
}

double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Inverse-CDF exponential draw, reproducible across platforms.
double exp_sample(std::mt19937_64& g, double rate) {
    return -std::log1p(-uniform01(g)) / rate;
}

constexpr double kT95Batch32 = 2.0395;  // t quantile, 31 degrees of freedom

}  // namespace

std::vector<double> default_size_bins() {
    std::vector<double> edges;
    for (int k = 0; k <= 24; ++k) edges.push_back(0.25 * k);  // 0, 0.25, ..., 6
    return edges;
}

int rank_of_choice(std::span<const double> backlogs, int chosen) {
    if (chosen < 0 || chosen >= static_cast<int>(backlogs.size()))
        throw std::invalid_argument("rank_of_choice: bad index");
    int rank = 1;
    for (size_t i = 0; i < backlogs.size(); ++i)
        if (backlogs[i] < backlogs[chosen]) ++rank;
    return rank;
}

std::vector<BinStats> conditional_stats(std::span<const JobRecord> records,
                                        std::span<const double> edges, int m) {
    if (edges.empty()) throw std::invalid_argument("conditional_stats: empty bins");
    for (size_t k = 1; k < edges.size(); ++k)
        if (!(edges[k] > edges[k - 1]))
            throw std::invalid_argument("conditional_stats: bin edges must be increasing");
    const size_t nb = edges.size();  // last bin is [edges.back(), inf)
    std::vector<BinStats> bins(nb);
    for (size_t k = 0; k < nb; ++k) {
        bins[k].lo = edges[k];
        bins[k].hi = (k + 1 < nb) ? edges[k + 1] : std::numeric_limits<double>::infinity();
        bins[k].rank_fractions.assign(m, 0.0);
    }
    for (const JobRecord& r : records) {
        auto it = std::upper_bound(edges.begin(), edges.end(), r.size);
        if (it == edges.begin()) continue;  // below the first edge
        const size_t k = static_cast<size_t>(it - edges.begin()) - 1;
        bins[k].count++;
        bins[k].mean_wait += r.wait;
        if (r.rank >= 1 && r.rank <= m) bins[k].rank_fractions[r.rank - 1] += 1.0;
    }
    std::vector<BinStats> out;
    for (auto& b : bins) {
        if (b.count == 0) continue;  // absent, never zero
        b.mean_wait /= static_cast<double>(b.count);
        for (double& f : b.rank_fractions) f /= static_cast<double>(b.count);
        out.push_back(std::move(b));
    }
    return out;
}

SimStats run_sim(const SimConfig& cfg, const std::function<void(const JobRecord&)>& record_sink) {
    const int m = cfg.params.m;
    const std::int64_t warmup = cfg.warmup_jobs >= 0 ? cfg.warmup_jobs : cfg.n_jobs / 10;
    if (cfg.n_jobs < 1) throw std::invalid_argument("run_sim: n_jobs must be >= 1");
    if (warmup >= cfg.n_jobs && cfg.n_jobs > 1)
        throw std::invalid_argument("run_sim: warmup_jobs must be < n_jobs");
    if (cfg.policy.kind == PolicyKind::ValueBased) {
        if (!cfg.policy.table) throw std::invalid_argument("run_sim: ValueBased needs a table");
        const auto& tp = cfg.policy.table->params;
        if (tp.m != m || tp.lambda != cfg.params.lambda ||
            tp.job_size.rate != cfg.params.job_size.rate)
            throw std::invalid_argument("run_sim: table params do not match simulated system");
    }

    // Substreams: 0 = inter-arrival times, 1 = job sizes, 2 = policy.
    auto rng_arrival = substream(cfg.seed, 0);
    auto rng_size = substream(cfg.seed, 1);
    auto rng_policy = substream(cfg.seed, 2);

    std::optional<ValueFunction> vf;
    if (cfg.policy.kind == PolicyKind::ValueBased) vf.emplace(cfg.policy.table);

    std::vector<double> backlog(m, 0.0);
    std::vector<int> counts(m, 0);  // jobs resident per server (for JSQ)
    std::vector<std::vector<double>> finish_times(m);  // job completion clocks
    int rr_cursor = -1;
    double clock = 0.0;
    double admitted = 0.0, drained = 0.0;

    std::vector<JobRecord> records;
    records.reserve(static_cast<size_t>(std::max<std::int64_t>(cfg.n_jobs - warmup, 0)));
    std::vector<double> waits;
    waits.reserve(records.capacity());

    for (std::int64_t job = 0; job < cfg.n_jobs; ++job) {
        const double gap = job == 0 ? 0.0 : exp_sample(rng_arrival, cfg.params.interarrival.rate);
        clock += gap;
        for (int i = 0; i < m; ++i) {
            const double work = std::min(backlog[i], gap);
            drained += work;
            backlog[i] -= work;
            auto& ft = finish_times[i];
            while (!ft.empty() && ft.front() <= clock + 1e-15) {
                ft.erase(ft.begin());
                --counts[i];
            }
        }
        const double size = exp_sample(rng_size, cfg.params.job_size.rate);
        int chosen;
        if (cfg.policy.kind == PolicyKind::ValueBased)
            chosen = vf->action(backlog, size);
        else
            chosen = heuristic_action(cfg.policy.kind, backlog, counts, rr_cursor, rng_policy);
        const JobRecord rec{size, backlog[chosen], rank_of_choice(backlog, chosen)};
        backlog[chosen] += size;
        admitted += size;
        finish_times[chosen].push_back(clock + rec.wait + size);
        ++counts[chosen];
        if (job >= warmup) {
            records.push_back(rec);
            waits.push_back(rec.wait);
            if (record_sink) record_sink(rec);
        }
    }

    SimStats stats;
    stats.unstable = cfg.params.offered_load() >= 1.0;
    stats.jobs_counted = static_cast<std::int64_t>(records.size());
    double total_backlog = 0.0;
    for (double b : backlog) total_backlog += b;
    const double resid = admitted - drained - total_backlog;
    stats.work_conservation_error = std::abs(resid) / std::max(admitted, 1.0);

    double sum = 0.0;
    for (double w : waits) sum += w;
    stats.mean_wait = waits.empty() ? 0.0 : sum / static_cast<double>(waits.size());

    // 95% CI by 32 batch means.
    const int nb = 32;
    if (static_cast<int>(waits.size()) >= 2 * nb) {
        const std::int64_t bs = static_cast<std::int64_t>(waits.size()) / nb;
        std::vector<double> bm(nb, 0.0);
        for (int b = 0; b < nb; ++b) {
            double s = 0.0;
            for (std::int64_t k = 0; k < bs; ++k) s += waits[b * bs + k];
            bm[b] = s / static_cast<double>(bs);
        }
        double mu = 0.0;
        for (double v : bm) mu += v;
        mu /= nb;
        double var = 0.0;
        for (double v : bm) var += (v - mu) * (v - mu);
        var /= (nb - 1);
        stats.ci_half_width = kT95Batch32 * std::sqrt(var / nb);
    }

    const std::vector<double> edges = cfg.size_bins.empty() ? default_size_bins() : cfg.size_bins;
    stats.bins = conditional_stats(records, edges, m);
    return stats;
}

}  // namespace sadp
