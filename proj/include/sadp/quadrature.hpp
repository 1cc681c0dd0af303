#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sadp {

struct QuadratureSpec {
    double delta = 0.25;
    int max_index = 2;        // J; the integrand is sampled at j*delta, j = 0..J
    double tail_tol = 1e-9;   // accepted relative tail mass beyond J*delta

    /// True when the exponential tail e^(-rate*J*delta) is within tolerance.
    bool tail_ok(double rate) const;
};

/// Largest even J with J*delta <= (K-1)*delta, for state-indexed integrands.
int even_truncation_index(int K);
/// Even J covering [0, span/rate] for pure-density integrals (span ~ 20).
int even_truncation_index(double rate, double delta, double span = 20.0);

/// Composite Simpson: (delta/3)(h_0 + 4h_1 + 2h_2 + ... + 4h_{J-1} + h_J).
/// h.size() must be J+1 with J even and J >= 2.
double simpson_expectation(std::span<const double> h, double delta);

/// The weight pattern written as "h_1 + 4h_2 + 2h_3 + ..." (no h_0, weight 4
/// on even subscripts). Kept only for A/B comparison against the standard rule.
double simpson_expectation_offset(std::span<const double> h, double delta);

/// Simpson weights including the delta/3 factor, length J+1.
std::vector<double> simpson_weights(int J, double delta);

/// Exponentially weighted one-step integrals over (0, delta):
///   A0 -- trapezoidal rule,
///   A1 -- exact for w(t) linear between the two grid points,
///   A2 -- exact for the quadratic through w at t = 0, delta, 2*delta.
/// All coefficients depend only on a = lambda*delta and are precomputed;
/// small-a evaluation switches to series to avoid cancellation.
class PoissonStepKernel {
  public:
    PoissonStepKernel(double lambda, double delta);

    double a0(double w0, double w1) const { return 0.5 * delta_ * lambda_ * (w0 + decay_ * w1); }
    double a1(double w0, double w1) const { return w0 * g1_ + (w1 - w0) * g2_over_a_; }
    double a2(double w0, double w1, double w2) const {
        return w0 * g1_ + (w1 - w0) * g2_over_a_ + 0.5 * (w0 - 2.0 * w1 + w2) * h_;
    }
    /// e^(-lambda*delta), the no-arrival probability over one step.
    double decay() const { return decay_; }
    /// 1 - e^(-lambda*delta), the one-step arrival mass.
    double mass() const { return g1_; }

  private:
    double lambda_, delta_;
    double decay_;      // e^(-a)
    double g1_;         // 1 - e^(-a)
    double g2_over_a_;  // (1 - e^(-a) - a e^(-a)) / a
    double h_;          // (g3 - a*g2) / a^2 with g3 = 2 - e^(-a)(2 + 2a + a^2)
};

// One-shot forms of the kernels.
double kernel_A0(double w0, double w1, double lambda, double delta);
double kernel_A1(double w0, double w1, double lambda, double delta);
double kernel_A2(double w0, double w1, double w2, double lambda, double delta);

}  // namespace sadp
