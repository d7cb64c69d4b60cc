#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace porodg {

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<std::array<double, 2>(double, double)>;

inline double eval_or_zero(const ScalarField& f, double x, double y) {
    return f ? f(x, y) : 0.0;
}

inline std::array<double, 2> eval_or_zero(const VectorField& f, double x, double y) {
    return f ? f(x, y) : std::array<double, 2>{0.0, 0.0};
}

/// Physical coefficients of the quasi-static Biot system, d = 2 throughout.
/// K_dr = lambda + 2 mu / d is kept explicitly and checked for consistency.
struct MaterialParameters {
    double lambda_lame = 1.0;
    double mu_lame = 1.0;
    double k_perm = 1.0;               // uniform scalar permeability
    std::vector<double> k_perm_cells;  // optional per-cell override
    double eta = 1.0;
    double biot_b = 0.8;
    double biot_m = 10.0;  // Biot modulus M
    double k_dr = 2.0;     // drained bulk modulus, lambda + mu in 2D
    double k_s = std::numeric_limits<double>::infinity();  // solid grain modulus
    double rho_b = 0.0;
    double rho_f = 0.0;
    std::array<double, 2> gravity = {0.0, 0.0};

    // Reference-state fields entering the momentum equation as data.
    ScalarField sigma0_v;  // volumetric initial stress (sigma_0 = sigma0_v * I)
    VectorField u0;
    ScalarField p0;

    static constexpr int dim = 2;

    double permeability(int cell) const {
        return k_perm_cells.empty() ? k_perm : k_perm_cells[cell];
    }

    /// 1D constrained modulus, lambda + 2 mu.
    double constrained_modulus() const { return lambda_lame + 2.0 * mu_lame; }

    void validate() const {
        if (!(mu_lame > 0.0)) throw std::invalid_argument("material: mu must be positive");
        if (!(eta > 0.0)) throw std::invalid_argument("material: eta must be positive");
        if (!(biot_m > 0.0)) throw std::invalid_argument("material: Biot modulus M must be positive");
        if (!(biot_b > 0.0) || biot_b > 1.0)
            throw std::invalid_argument("material: Biot coefficient b must lie in (0, 1]");
        if (!(k_perm > 0.0)) throw std::invalid_argument("material: permeability must be positive");
        for (double k : k_perm_cells)
            if (!(k > 0.0)) throw std::invalid_argument("material: per-cell permeability must be positive");
        const double kdr_expect = lambda_lame + 2.0 * mu_lame / dim;
        if (std::abs(k_dr - kdr_expect) > 1e-12 * std::max(1.0, std::abs(kdr_expect)))
            throw std::invalid_argument("material: k_dr inconsistent with lambda + 2 mu / d");
        if (!(k_dr > 0.0)) throw std::invalid_argument("material: drained bulk modulus must be positive");
        if (std::isfinite(k_s)) {
            const double b_expect = 1.0 - k_dr / k_s;
            if (std::abs(biot_b - b_expect) > 1e-12 * std::max(1.0, std::abs(b_expect)))
                throw std::invalid_argument("material: b inconsistent with 1 - K_dr/K_s");
        }
    }
};

} // namespace porodg
