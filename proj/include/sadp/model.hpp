#pragma once

#include <cmath>
#include <stdexcept>

namespace sadp {

/// Exponential distribution with a given rate. Used for both job sizes
/// (rate mu) and inter-arrival times (rate lambda).
struct ExpDist {
    double rate = 1.0;

    explicit ExpDist(double r) : rate(r) {
        if (!(r > 0.0)) throw std::invalid_argument("ExpDist: rate must be > 0");
    }
    ExpDist() = default;

    double pdf(double x) const {
        if (x < 0.0) throw std::domain_error("ExpDist::pdf: negative argument");
        return rate * std::exp(-rate * x);
    }
    double cdf(double x) const { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }
    double mean() const { return 1.0 / rate; }
    double second_moment() const { return 2.0 / (rate * rate); }
};

/// Cost incurred by a job of size x joining a server with backlog u.
/// The default (and only shipped) kind is the waiting-time cost c(u,x) = u.
struct CostFn {
    enum class Kind { WaitingTime };
    Kind kind = Kind::WaitingTime;

    double operator()(double u, double x) const {
        if (u < 0.0 || x < 0.0) throw std::domain_error("CostFn: negative argument");
        (void)x;
        return u;  // waiting-time cost
    }
};

struct SystemParams {
    int m = 1;             // number of parallel FCFS servers
    double lambda = 1.0;   // total arrival rate
    ExpDist job_size{1.0};
    ExpDist interarrival{1.0};
    CostFn cost;

    SystemParams() = default;
    SystemParams(int servers, double arrival_rate, double mu)
        : m(servers), lambda(arrival_rate), job_size(mu), interarrival(arrival_rate) {
        if (m < 1) throw std::invalid_argument("SystemParams: m must be >= 1");
        if (!(lambda > 0.0)) throw std::invalid_argument("SystemParams: lambda must be > 0");
    }

    double offered_load() const { return lambda * job_size.mean() / m; }
    bool stable() const { return offered_load() < 1.0; }
    /// Per-server arrival rate under a uniform random split.
    double lambda_split() const { return lambda / m; }
};

}  // namespace sadp
