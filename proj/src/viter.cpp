#include "sadp/viter.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace sadp {

namespace {
constexpr int kMaxServers = 16;
constexpr int kDivergenceStreak = 50;
constexpr double kPlateauRelTol = 1e-12;
}  // namespace

const char* variant_name(SweepVariant v) {
    switch (v) {
        case SweepVariant::Basic: return "basic";
        case SweepVariant::RecursiveA0: return "a0";
        case SweepVariant::RecursiveA1: return "a1";
        case SweepVariant::RecursiveA2: return "a2";
    }
    return "?";
}

ValueTable init_table(const GridSpec& spec, const SystemParams& params, InitMode mode,
                      const ValueTable* source) {
    if (spec.m != params.m) throw std::invalid_argument("init_table: spec.m != params.m");
    ValueTable t;
    t.spec = spec;
    t.params = params;
    t.values.assign(state_count(spec.K, spec.m), 0.0);
    switch (mode) {
        case InitMode::Zero:
            break;
        case InitMode::Rnd: {
            // M/G/1 decomposition of the uniform random split:
            // v[z] = sum_i lambda' (z_i d)^2 / (2 (1 - rho')).
            const double lp = params.lambda_split();
            const double rhop = lp * params.job_size.mean();
            const double coef = lp / (2.0 * (1.0 - rhop));
            std::vector<int> z(spec.m, 0);
            std::int64_t s = 0;
            do {
                double v = 0.0;
                for (int q = 0; q < spec.m; ++q) {
                    const double u = z[q] * spec.delta;
                    v += coef * u * u;
                }
                t.values[s++] = v;
            } while (next_sorted_state(z, spec.K));
            break;
        }
        case InitMode::FromTable: {
            if (source == nullptr) throw std::invalid_argument("init_table: missing source table");
            if (!(source->spec == spec))
                throw std::invalid_argument("init_table: source grid (m, K, delta) mismatch");
            t.values = source->values;
            break;
        }
    }
    return t;
}

Solver::Solver(GridSpec spec, SystemParams params)
    : spec_(spec),
      params_(params),
      space_(spec),
      J_(even_truncation_index(spec.K)),
      kernel_(params.lambda, spec.delta) {
    if (spec.m != params.m) throw std::invalid_argument("Solver: spec.m != params.m");
    if (spec.m > kMaxServers) throw std::invalid_argument("Solver: too many servers");
    const auto sw = simpson_weights(J_, spec_.delta);
    fx_w_.resize(J_ + 1);
    fa_w_.resize(J_ + 1);
    e1_rank_.resize(J_ + 1);
    fx_mass_ = 0.0;
    for (int j = 0; j <= J_; ++j) {
        const double x = j * spec_.delta;
        fx_w_[j] = sw[j] * params_.job_size.pdf(x);
        fa_w_[j] = sw[j] * params_.interarrival.pdf(x);
        fx_mass_ += fx_w_[j];
        const int c = std::min(j, spec_.K - 1);
        e1_rank_[j] = space_.binom(c + spec_.m - 1, spec_.m);
    }
    fa_suffix_.assign(J_ + 2, 0.0);
    for (int j = J_; j >= 0; --j) fa_suffix_[j] = fa_suffix_[j + 1] + fa_w_[j];
}

double Solver::compute_w0(std::span<const double> v) const {
    double sum = 0.0;
    for (int j = 0; j <= J_; ++j) {
        const double x = j * spec_.delta;
        sum += fx_w_[j] * (params_.cost(0.0, x) + v[e1_rank_[j]]);
    }
    return sum;
}

void Solver::update_w(std::span<const double> v, double w0, std::span<double> w_out,
                      Aggregate agg) const {
    const int m = spec_.m;
    const int K = spec_.K;
    const double d = spec_.delta;
    std::vector<int> z(m, 0);
    std::int64_t s = 0;
    // Per-server incremental tracks across the job-size integral: track i
    // follows the rank of z + j e_i as j grows, updating one binomial term
    // per step instead of re-ranking the full tuple.
    int c[kMaxServers], q[kMaxServers];
    std::int64_t r[kMaxServers];
    double costu[kMaxServers];
    do {
        for (int i = 0; i < m; ++i) {
            c[i] = z[i];
            q[i] = i;
            r[i] = s;
            costu[i] = z[i] * d;
        }
        double sum = 0.0;
        for (int j = 0; j <= J_; ++j) {
            const double x = j * d;
            if (j > 0) {
                for (int i = 0; i < m; ++i) {
                    if (c[i] < K - 1) {
                        int qi = q[i];
                        while (qi + 1 < m && z[qi + 1] <= c[i]) ++qi;
                        q[i] = qi;
                        ++c[i];
                        r[i] += space_.binom(c[i] - 1 + qi, qi);
                    }
                }
            }
            double best;
            if (agg == Aggregate::Min) {
                best = params_.cost(costu[0], x) + v[r[0]];
                for (int i = 1; i < m; ++i) {
                    const double cand = params_.cost(costu[i], x) + v[r[i]];
                    if (cand < best) best = cand;
                }
            } else {
                best = 0.0;
                for (int i = 0; i < m; ++i) best += params_.cost(costu[i], x) + v[r[i]];
                best /= m;
            }
            sum += fx_w_[j] * (best - w0);
        }
        if (!std::isfinite(sum))
            throw std::runtime_error("update_w: non-finite value at state rank " + std::to_string(s));
        w_out[s] = sum;
        ++s;
    } while (next_sorted_state(z, K));
}

void Solver::update_v_basic(std::span<const double> w, std::span<double> v_out) const {
    const int m = spec_.m;
    std::vector<int> z(m, 0);
    std::int64_t s = 0;
    int t[kMaxServers];
    do {
        std::int64_t r = s;
        int nz = 0;
        for (int i = 0; i < m; ++i) {
            t[i] = z[i];
            if (z[i] > 0) ++nz;
        }
        double sum = fa_w_[0] * w[s];
        int j = 1;
        for (; j <= J_; ++j) {
            if (nz == 0) {
                // All coordinates drained; the remaining mass sits on w[0].
                sum += w[0] * fa_suffix_[j];
                break;
            }
            for (int qq = 0; qq < m; ++qq) {
                if (t[qq] > 0) {
                    r -= space_.binom(t[qq] - 1 + qq, qq);
                    if (--t[qq] == 0) --nz;
                }
            }
            sum += fa_w_[j] * w[r];
        }
        v_out[s] = sum;
        ++s;
    } while (next_sorted_state(z, spec_.K));
}

void Solver::update_v_recursive(std::span<const double> w, SweepVariant variant,
                                std::span<double> v_out) const {
    if (variant == SweepVariant::Basic)
        throw std::invalid_argument("update_v_recursive: variant must be a0/a1/a2");
    const int m = spec_.m;
    const double decay = kernel_.decay();
    const double mass = kernel_.mass();
    std::vector<int> z(m, 0);
    std::int64_t s = 0;
    do {
        // Ranks of (z - e)^+ and (z - 2e)^+; both are <= s, already updated.
        std::int64_t r1 = 0, r2 = 0;
        for (int qq = 0; qq < m; ++qq) {
            r1 += space_.binom(std::max(z[qq] - 1, 0) + qq, qq + 1);
            r2 += space_.binom(std::max(z[qq] - 2, 0) + qq, qq + 1);
        }
        double A;
        switch (variant) {
            case SweepVariant::RecursiveA0: A = kernel_.a0(w[s], w[r1]); break;
            case SweepVariant::RecursiveA1: A = kernel_.a1(w[s], w[r1]); break;
            default: A = kernel_.a2(w[s], w[r1], w[r2]); break;
        }
        if (s == 0) {
            v_out[0] = A / mass;  // advance(0,1) = 0: geometric fixed point
        } else {
            v_out[s] = A + decay * v_out[r1];
        }
        ++s;
    } while (next_sorted_state(z, spec_.K));
}

double Solver::metric_E(std::span<const double> v_new, std::span<const double> v_old) const {
    if (v_new.size() != v_old.size()) throw std::invalid_argument("metric_E: size mismatch");
    // Kahan-compensated accumulation over the full array.
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < v_new.size(); ++i) {
        const double dlt = v_new[i] - v_old[i];
        const double y = dlt * dlt - comp;
        const double tt = sum + y;
        comp = (tt - sum) - y;
        sum = tt;
    }
    return sum / static_cast<double>(v_new.size());
}

RunResult Solver::run(ValueTable table, const StoppingRule& rule, SweepVariant variant,
                      const ProgressFn& progress) const {
    if (rule.warmup_rounds > rule.max_rounds && rule.max_rounds > 0)
        throw std::invalid_argument("run: warmup_rounds > max_rounds");
    if (static_cast<std::int64_t>(table.values.size()) != space_.size())
        throw std::invalid_argument("run: table size does not match state space");
    RunResult out;
    table.variant = variant;
    std::vector<double> w(space_.size()), v_next(space_.size());
    int e_up_streak = 0;
    for (int round = 1; round <= rule.max_rounds; ++round) {
        const auto t0 = std::chrono::steady_clock::now();
        const double w0 = compute_w0(table.values);
        update_w(table.values, w0, w);
        if (variant == SweepVariant::Basic)
            update_v_basic(w, v_next);
        else
            update_v_recursive(w, variant, v_next);
        const double E = metric_E(v_next, table.values);
        table.values.swap(v_next);
        ++table.iterations;
        table.w0 = w0;
        table.w0_history.push_back(w0);
        table.e_history.push_back(E);
        if (progress) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            progress({round, w0, E, secs});
        }
        if (round > rule.warmup_rounds) {
            if (!table.e_history.empty() && table.e_history.size() >= 2 &&
                E > table.e_history[table.e_history.size() - 2]) {
                if (++e_up_streak >= kDivergenceStreak) {
                    out.table = std::move(table);
                    out.status = RunStatus::Diverged;
                    out.diagnostic = "metric E increased for " + std::to_string(kDivergenceStreak) +
                                     " consecutive rounds (round " + std::to_string(round) +
                                     ", E=" + std::to_string(E) + ")";
                    return out;
                }
            } else {
                e_up_streak = 0;
            }
            if (E < rule.e_tol) {
                out.table = std::move(table);
                out.status = RunStatus::Converged;
                return out;
            }
            if (rule.w0_window > 1 &&
                static_cast<int>(table.w0_history.size()) >= rule.w0_window) {
                const auto& h = table.w0_history;
                double lo = h.back(), hi = h.back();
                for (int k = 0; k < rule.w0_window; ++k) {
                    const double x = h[h.size() - 1 - k];
                    lo = std::min(lo, x);
                    hi = std::max(hi, x);
                }
                if (hi - lo <= kPlateauRelTol * std::max(1.0, std::abs(h.back()))) {
                    out.table = std::move(table);
                    out.status = RunStatus::Converged;
                    return out;
                }
            }
        }
    }
    out.table = std::move(table);
    out.status = RunStatus::MaxRounds;
    return out;
}

double compute_w0(const ValueTable& v) { return Solver(v.spec, v.params).compute_w0(v.values); }

std::vector<double> update_w(const ValueTable& v, double w0, Aggregate agg) {
    Solver s(v.spec, v.params);
    std::vector<double> w(s.space().size());
    s.update_w(v.values, w0, w, agg);
    return w;
}

std::vector<double> update_v_basic(const ValueTable& v, std::span<const double> w) {
    Solver s(v.spec, v.params);
    std::vector<double> out(s.space().size());
    s.update_v_basic(w, out);
    return out;
}

std::vector<double> update_v_recursive(const ValueTable& v, std::span<const double> w,
                                       SweepVariant variant) {
    Solver s(v.spec, v.params);
    std::vector<double> out(s.space().size());
    s.update_v_recursive(w, variant, out);
    return out;
}

double metric_E(const ValueTable& v_new, const ValueTable& v_old) {
    if (!(v_new.spec == v_old.spec)) throw std::invalid_argument("metric_E: grid mismatch");
    return Solver(v_new.spec, v_new.params).metric_E(v_new.values, v_old.values);
}

RunResult run(ValueTable table, const StoppingRule& rule, SweepVariant variant,
              const ProgressFn& progress) {
    Solver s(table.spec, table.params);
    return s.run(std::move(table), rule, variant, progress);
}

}  // namespace sadp
