#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace porodg {

struct QuadratureRule {
    std::vector<double> points;   // on [0, 1]
    std::vector<double> weights;  // sum to 1
};

namespace detail {

/// Legendre P_n(x) and P_n'(x) by recurrence.
inline std::pair<double, double> legendre(int n, double x) {
    if (n == 0) return {1.0, 0.0};
    double pm = 1.0, p = x;
    for (int k = 2; k <= n; ++k) {
        const double pn = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm) / k;
        pm = p;
        p = pn;
    }
    const double dp = n * (x * p - pm) / (x * x - 1.0);
    return {p, dp};
}

} // namespace detail

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n-1.
inline QuadratureRule gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule q;
    q.points.resize(n);
    q.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        // Chebyshev initial guess, Newton polish.
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = detail::legendre(n, x);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const auto [p, dp] = detail::legendre(n, x);
        (void)p;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        q.points[n - 1 - i] = 0.5 * (x + 1.0);
        q.weights[n - 1 - i] = 0.5 * w;
    }
    return q;
}

/// Number of Gauss points per direction used to integrate analytic data
/// (right-hand sides, boundary data, error norms). Operator integrands are
/// bilinear-order and use the fixed 2x2 cell / 2-point face rules.
inline constexpr int kDataQuadOrder = 6;

} // namespace porodg
