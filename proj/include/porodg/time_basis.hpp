#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "porodg/quadrature.hpp"

namespace porodg {

/// Partition 0 = t_0 < t_1 < ... < t_N = T of the time interval into slabs
/// I_n = (t_{n-1}, t_n].
struct TimePartition {
    std::vector<double> t_points;

    int n_slabs() const { return static_cast<int>(t_points.size()) - 1; }
    double slab_length(int n) const { return t_points[n + 1] - t_points[n]; }
    double t_begin(int n) const { return t_points[n]; }
    double t_end(int n) const { return t_points[n + 1]; }
    double total_time() const { return t_points.back(); }

    void validate() const {
        if (t_points.size() < 2) throw std::invalid_argument("time partition: need at least one slab");
        if (t_points.front() != 0.0) throw std::invalid_argument("time partition: must start at t = 0");
        for (std::size_t i = 1; i < t_points.size(); ++i)
            if (!(t_points[i] > t_points[i - 1]))
                throw std::invalid_argument("time partition: points must be strictly increasing");
    }
};

inline TimePartition uniform_partition(double T, int n_slabs) {
    if (!(T > 0.0) || n_slabs < 1) throw std::invalid_argument("uniform_partition: bad arguments");
    TimePartition p;
    p.t_points.resize(n_slabs + 1);
    for (int n = 0; n <= n_slabs; ++n) p.t_points[n] = T * n / n_slabs;
    p.t_points.back() = T;
    return p;
}

inline constexpr int kMaxTimeDegree = 10;

/// r+1 right-Gauss-Radau points on (0, 1], the last equal to 1. These are
/// the roots of the right-Radau polynomial, i.e. the images s = (1 - x)/2
/// of the roots of (P_r(x) + P_{r+1}(x))/(1 + x) together with s = 1.
inline std::vector<double> radau_points(int r) {
    if (r < 0 || r > kMaxTimeDegree) throw std::invalid_argument("radau_points: r out of range [0, 10]");
    std::vector<double> s;
    s.reserve(r + 1);

    if (r > 0) {
        auto g = [&](double x) {
            // (P_r(x) + P_{r+1}(x)) / (1 + x), removable singularity at -1
            const double f = detail::legendre(r, x).first + detail::legendre(r + 1, x).first;
            return f / (1.0 + x);
        };
        auto gprime = [&](double x) {
            const auto [pr, dpr] = detail::legendre(r, x);
            const auto [ps, dps] = detail::legendre(r + 1, x);
            const double f = pr + ps, df = dpr + dps;
            return (df * (1.0 + x) - f) / ((1.0 + x) * (1.0 + x));
        };
        // The r interior roots are simple and lie in (-1, 1): locate sign
        // changes on a fine grid, then polish with Newton.
        const int grid = 200 * (r + 1);
        double xa = -1.0 + 1e-12;
        double ga = g(xa);
        for (int k = 1; k <= grid; ++k) {
            const double xb = -1.0 + 2.0 * k / grid - (k == grid ? 1e-12 : 0.0);
            const double gb = g(xb);
            if (ga == 0.0) s.push_back(0.5 * (1.0 - xa));
            if (ga * gb < 0.0) {
                double lo = xa, hi = xb;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (g(lo) * g(mid) <= 0.0 ? hi : lo) = mid;
                }
                double x = 0.5 * (lo + hi);
                for (int it = 0; it < 50; ++it) {
                    const double dx = g(x) / gprime(x);
                    x -= dx;
                    if (std::abs(dx) < 1e-16) break;
                }
                s.push_back(0.5 * (1.0 - x));
            }
            xa = xb;
            ga = gb;
        }
        if (static_cast<int>(s.size()) != r)
            throw std::runtime_error("radau_points: root search failed");
    }

    s.push_back(1.0);
    std::sort(s.begin(), s.end());
    return s;
}

/// Nodal Lagrange basis at the right-Radau points together with the exact
/// time coefficient matrices of the dG(r) slab problem:
///   M_hat[i][j] = int_0^1 phi_i phi_j,
///   G_hat[i][j] = int_0^1 phi_j' phi_i + phi_j(0) phi_i(0).
/// The jump term in G_hat carries the weak initial condition.
struct TimeBasis {
    int r = 0;
    Eigen::VectorXd nodes;       // r+1 points in (0, 1], last is 1
    Eigen::VectorXd weights;     // Radau quadrature weights, = diag(M_hat)
    Eigen::VectorXd bary;        // barycentric weights of the nodes
    Eigen::VectorXd phi_at0;     // phi_j(0+)
    Eigen::MatrixXd deriv;       // deriv(i, j) = phi_j'(c_i)
    Eigen::MatrixXd G_hat;
    Eigen::MatrixXd M_hat;

    int n_nodes() const { return r + 1; }

    /// All basis values at a point s (barycentric formula; exact at nodes).
    Eigen::VectorXd eval(double s) const {
        const int n = n_nodes();
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        for (int j = 0; j < n; ++j) {
            if (std::abs(s - nodes[j]) < 1e-14) {
                v[j] = 1.0;
                return v;
            }
        }
        double denom = 0.0;
        for (int j = 0; j < n; ++j) {
            v[j] = bary[j] / (s - nodes[j]);
            denom += v[j];
        }
        return v / denom;
    }
};

inline TimeBasis time_matrices(int r) {
    TimeBasis b;
    b.r = r;
    const auto pts = radau_points(r);
    const int n = r + 1;
    b.nodes = Eigen::Map<const Eigen::VectorXd>(pts.data(), n);

    b.bary.resize(n);
    for (int j = 0; j < n; ++j) {
        double w = 1.0;
        for (int k = 0; k < n; ++k)
            if (k != j) w /= (b.nodes[j] - b.nodes[k]);
        b.bary[j] = w;
    }

    // Quadrature weights w_i = int_0^1 phi_i, via a Gauss rule exact for
    // degree r. M_hat is then exactly diag(w): the (r+1)-point Radau rule
    // integrates the degree-2r products phi_i phi_j without error.
    if (r == 0) {
        b.weights = Eigen::VectorXd::Ones(1);
    } else {
        const QuadratureRule gl = gauss_legendre(n + 1);
        b.weights = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < gl.points.size(); ++k)
            b.weights += gl.weights[k] * b.eval(gl.points[k]);
    }

    b.M_hat = b.weights.asDiagonal();

    // Differentiation matrix at the nodes.
    b.deriv.resize(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            b.deriv(i, j) = (b.bary[j] / b.bary[i]) / (b.nodes[i] - b.nodes[j]);
            diag -= b.deriv(i, j);
        }
        b.deriv(i, i) = diag;
    }

    b.phi_at0 = b.eval(0.0);

    // int phi_j' phi_i has degree 2r - 1, so the Radau rule is exact and
    // collapses to w_i phi_j'(c_i); the jump adds phi_j(0) phi_i(0).
    b.G_hat = b.weights.asDiagonal() * b.deriv + b.phi_at0 * b.phi_at0.transpose();
    return b;
}

} // namespace porodg
