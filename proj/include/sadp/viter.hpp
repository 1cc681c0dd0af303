#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "sadp/grid.hpp"
#include "sadp/model.hpp"
#include "sadp/quadrature.hpp"

namespace sadp {

enum class SweepVariant : std::uint32_t { Basic = 0, RecursiveA0 = 1, RecursiveA1 = 2, RecursiveA2 = 3 };
enum class InitMode { Zero, Rnd, FromTable };

const char* variant_name(SweepVariant v);

/// Value function over the reduced state space, flat array indexed by rank,
/// together with the run metadata needed to resume or audit a solve.
struct ValueTable {
    GridSpec spec;
    SystemParams params;
    SweepVariant variant = SweepVariant::RecursiveA2;
    std::vector<double> values;
    std::uint64_t iterations = 0;
    double w0 = 0.0;
    std::vector<double> w0_history;
    std::vector<double> e_history;
};

struct StoppingRule {
    int warmup_rounds = 100;
    int max_rounds = 2000;
    double e_tol = 1e-8;
    int w0_window = 0;  // 0 disables the plateau test
};

struct ProgressRecord {
    int round = 0;
    double w0 = 0.0;
    double E = 0.0;
    double seconds = 0.0;
};
using ProgressFn = std::function<void(const ProgressRecord&)>;

enum class RunStatus { Converged, MaxRounds, Diverged };

struct RunResult {
    ValueTable table;
    RunStatus status = RunStatus::MaxRounds;
    std::string diagnostic;
};

/// How update_w combines the per-server continuation values: Min is the
/// Bellman operator, Mean is the uniform-random-split (RND) policy operator.
enum class Aggregate { Min, Mean };

ValueTable init_table(const GridSpec& spec, const SystemParams& params, InitMode mode,
                      const ValueTable* source = nullptr);

/// One value-iteration engine bound to a (grid, params) pair. Holds the
/// state space, sampled densities and quadrature weights, so repeated
/// rounds do no per-round setup work.
class Solver {
  public:
    Solver(GridSpec spec, SystemParams params);

    const StateSpace& space() const { return space_; }
    int truncation_index() const { return J_; }

    /// w0 = E[c(0,X) + v(X e_1)], the round's mean-cost estimate.
    double compute_w0(std::span<const double> v) const;

    /// Pre-assignment update: w[z] = E_X[agg_i{c(z_i d, X) + v[z + X e_i]}] - w0-mass.
    void update_w(std::span<const double> v, double w0, std::span<double> w_out,
                  Aggregate agg = Aggregate::Min) const;

    /// Post-assignment update by composite Simpson over the inter-arrival
    /// density; valid for any inter-arrival distribution.
    void update_v_basic(std::span<const double> w, std::span<double> v_out) const;

    /// Single-pass sweep v[z] <- A + e^(-lambda d) v[z - e] in rank order;
    /// exact for Poisson arrivals. The origin references itself, so there
    /// the geometric fixed point v[0] = A(0)/(1 - e^(-lambda d)) is used.
    void update_v_recursive(std::span<const double> w, SweepVariant variant,
                            std::span<double> v_out) const;

    double metric_E(std::span<const double> v_new, std::span<const double> v_old) const;

    RunResult run(ValueTable table, const StoppingRule& rule, SweepVariant variant,
                  const ProgressFn& progress = {}) const;

  private:
    GridSpec spec_;
    SystemParams params_;
    StateSpace space_;
    int J_;                         // even truncation index for grid-indexed integrands
    std::vector<double> fx_w_;      // simpson_weight[j] * f(j d)        (job sizes)
    std::vector<double> fa_w_;      // simpson_weight[j] * f_A(j d)      (inter-arrivals)
    std::vector<double> fa_suffix_; // suffix sums of fa_w_
    double fx_mass_;                // Simpson mass of f over the truncated range
    std::vector<std::int64_t> e1_rank_;  // rank of (0,...,0,min(j,K-1))
    PoissonStepKernel kernel_;
};

// Convenience wrappers over a throwaway Solver, matching the table-level ops.
double compute_w0(const ValueTable& v);
std::vector<double> update_w(const ValueTable& v, double w0, Aggregate agg = Aggregate::Min);
std::vector<double> update_v_basic(const ValueTable& v, std::span<const double> w);
std::vector<double> update_v_recursive(const ValueTable& v, std::span<const double> w,
                                       SweepVariant variant);
double metric_E(const ValueTable& v_new, const ValueTable& v_old);
RunResult run(ValueTable table, const StoppingRule& rule, SweepVariant variant,
              const ProgressFn& progress = {});

}  // namespace sadp
