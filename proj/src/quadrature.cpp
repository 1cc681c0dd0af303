#include "sadp/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace sadp {

bool QuadratureSpec::tail_ok(double rate) const {
    return std::exp(-rate * max_index * delta) <= tail_tol;
}

int even_truncation_index(int K) {
    int J = K - 1;
    if (J % 2 != 0) --J;
    return J < 2 ? 2 : J;
}

int even_truncation_index(double rate, double delta, double span) {
    int J = static_cast<int>(std::ceil(span / rate / delta));
    if (J % 2 != 0) ++J;
    return J < 2 ? 2 : J;
}

double simpson_expectation(std::span<const double> h, double delta) {
    const int J = static_cast<int>(h.size()) - 1;
    if (J < 2 || J % 2 != 0)
        throw std::invalid_argument("simpson_expectation: need an even number of intervals >= 2");
    double sum = h[0] + h[J];
    for (int j = 1; j < J; ++j) sum += (j % 2 == 1 ? 4.0 : 2.0) * h[j];
    return delta / 3.0 * sum;
}

double simpson_expectation_offset(std::span<const double> h, double delta) {
    const int J = static_cast<int>(h.size()) - 1;
    if (J < 2 || J % 2 != 0)
        throw std::invalid_argument("simpson_expectation_offset: need an even number of intervals >= 2");
    double sum = h[1];
    for (int j = 2; j <= J; ++j) sum += (j % 2 == 0 ? 4.0 : 2.0) * h[j];
    return delta / 3.0 * sum;
}

std::vector<double> simpson_weights(int J, double delta) {
    if (J < 2 || J % 2 != 0) throw std::invalid_argument("simpson_weights: J must be even and >= 2");
    std::vector<double> w(J + 1, 0.0);
    const double c = delta / 3.0;
    w[0] = c;
    w[J] = c;
    for (int j = 1; j < J; ++j) w[j] = (j % 2 == 1 ? 4.0 : 2.0) * c;
    return w;
}

namespace {

// g2(a) = 1 - e^(-a) - a e^(-a) = sum_{k>=2} (-1)^k a^k (k-1)/k!
double g2(double a) {
    if (a > 0.5) return -std::expm1(-a) - a * std::exp(-a);
    double term = a * a;  // a^k / (k-2)!? track p = a^k/k!
    double p = a * a / 2.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 2; k < 40; ++k) {
        term = sign * p * (k - 1);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
        p *= a / (k + 1);
        sign = -sign;
    }
    return sum;
}

// g3(a) = 2 - e^(-a)(2 + 2a + a^2) = sum_{n>=3} (-1)^(n+1) a^n (n-1)(n-2)/n!
double g3(double a) {
    if (a > 0.5) return 2.0 - std::exp(-a) * (2.0 + a * (2.0 + a));
    double p = a * a * a / 6.0;  // a^n / n!
    double sum = 0.0;
    double sign = 1.0;
    for (int n = 3; n < 40; ++n) {
        const double term = sign * p * (n - 1) * (n - 2);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) break;
        p *= a / (n + 1);
        sign = -sign;
    }
    return sum;
}

}  // namespace

PoissonStepKernel::PoissonStepKernel(double lambda, double delta)
    : lambda_(lambda), delta_(delta) {
    if (!(lambda > 0.0) || !(delta > 0.0))
        throw std::invalid_argument("PoissonStepKernel: lambda and delta must be > 0");
    const double a = lambda * delta;
    decay_ = std::exp(-a);
    g1_ = -std::expm1(-a);
    const double v2 = g2(a);
    g2_over_a_ = v2 / a;
    h_ = (g3(a) - a * v2) / (a * a);
}

double kernel_A0(double w0, double w1, double lambda, double delta) {
    return PoissonStepKernel(lambda, delta).a0(w0, w1);
}
double kernel_A1(double w0, double w1, double lambda, double delta) {
    return PoissonStepKernel(lambda, delta).a1(w0, w1);
}
double kernel_A2(double w0, double w1, double w2, double lambda, double delta) {
    return PoissonStepKernel(lambda, delta).a2(w0, w1, w2);
}

}  // namespace sadp
