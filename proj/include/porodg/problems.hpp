#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "porodg/analysis.hpp"
#include "porodg/march.hpp"

namespace porodg {

/// Raw material inputs; either the Biot coefficient b is given directly or
/// the grain modulus K_s is given and b = 1 - K_dr/K_s is derived.
struct MaterialConfig {
    double lambda = 1.0;
    double mu = 1.0;
    double k_perm = 1.0;
    double eta = 1.0;
    double biot_m = 10.0;
    double biot_b = 0.8;  // set < 0 to derive from k_s
    double k_s = -1.0;    // < 0: not given
    double rho_b = 0.0;
    double rho_f = 0.0;
    std::array<double, 2> gravity = {0.0, 0.0};
};

inline MaterialParameters material_from_config(const MaterialConfig& c) {
    MaterialParameters m;
    m.lambda_lame = c.lambda;
    m.mu_lame = c.mu;
    m.k_perm = c.k_perm;
    m.eta = c.eta;
    m.biot_m = c.biot_m;
    m.rho_b = c.rho_b;
    m.rho_f = c.rho_f;
    m.gravity = c.gravity;
    m.k_dr = c.lambda + 2.0 * c.mu / MaterialParameters::dim;
    if (c.biot_b >= 0.0) {
        m.biot_b = c.biot_b;
        m.k_s = c.k_s > 0.0 ? c.k_s : std::numeric_limits<double>::infinity();
    } else {
        if (!(c.k_s > 0.0))
            throw std::invalid_argument("material: either b or K_s must be given");
        m.k_s = c.k_s;
        m.biot_b = 1.0 - m.k_dr / c.k_s;
    }
    m.validate();
    return m;
}

// ---------------------------------------------------------------------------
// Terzaghi consolidation
// ---------------------------------------------------------------------------

/// Derived constants of the 1D consolidation column: constrained modulus
/// K_c = lambda + 2 mu, storage S = 1/M + b^2/K_c, consolidation
/// coefficient c_v = (k/eta)/S, and the undrained initial pressure
/// p_i = b w M / (K_c + b^2 M) of an instantaneously applied load w.
struct TerzaghiParams {
    double H = 1.0;  // column height
    double w = 1.0;  // applied load
    double k_c = 3.0;
    double storage = 0.0;
    double c_v = 0.0;
    double p_i = 0.0;
};

inline TerzaghiParams make_terzaghi_params(const MaterialParameters& m, double H, double w) {
    TerzaghiParams t;
    t.H = H;
    t.w = w;
    t.k_c = m.constrained_modulus();
    t.storage = 1.0 / m.biot_m + m.biot_b * m.biot_b / t.k_c;
    t.c_v = (m.k_perm / m.eta) / t.storage;
    t.p_i = m.biot_b * w * m.biot_m / (t.k_c + m.biot_b * m.biot_b * m.biot_m);
    return t;
}

/// Truncated series solution of the consolidation column, drained at depth
/// z = 0 and sealed at the rigid base z = H.
inline double terzaghi_pressure(double z, double t, const TerzaghiParams& p, int n_terms) {
    if (!(t > 0.0)) throw std::invalid_argument("terzaghi_pressure: t must be positive");
    if (n_terms < 1) throw std::invalid_argument("terzaghi_pressure: n_terms must be >= 1");
    double s = 0.0;
    for (int k = 0; k < n_terms; ++k) {
        const double a = (2.0 * k + 1.0);
        s += 1.0 / a * std::sin(a * M_PI * z / (2.0 * p.H)) *
             std::exp(-a * a * M_PI * M_PI * p.c_v * t / (4.0 * p.H * p.H));
    }
    return p.p_i * 4.0 / M_PI * s;
}

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

enum class SMode { affine, poly2, poly3, sin2 };

inline SMode smode_from_string(const std::string& s) {
    if (s == "affine") return SMode::affine;
    if (s == "poly2") return SMode::poly2;
    if (s == "poly3") return SMode::poly3;
    if (s == "sin2") return SMode::sin2;
    throw std::invalid_argument("unknown s(t) mode: " + s);
}

inline double smode_value(SMode m, double t) {
    switch (m) {
        case SMode::affine: return 1.0 + t;
        case SMode::poly2: return 1.0 + t + t * t;
        case SMode::poly3: return 1.0 + t + t * t * t;
        default: return std::sin(t) + 2.0;
    }
}

inline double smode_derivative(SMode m, double t) {
    switch (m) {
        case SMode::affine: return 1.0;
        case SMode::poly2: return 1.0 + 2.0 * t;
        case SMode::poly3: return 1.0 + 3.0 * t * t;
        default: return std::cos(t);
    }
}

/// Manufactured fields and the matching sources, obtained by substituting
///   p* = cos(pi x) cos(pi y) s(t),
///   u* = (sin(pi x) sin(pi y), sin(pi x) sin(pi y)) s(t) / 10,
///   q* = -(k/eta) (grad p* - rho_f g)
/// into the strong-form system. The momentum source replaces rho_b g
/// entirely; the Darcy row is satisfied by construction with source
/// rho_f g.
struct ManufacturedSolution {
    ScalarFieldT p;
    VectorFieldT u;
    VectorFieldT q;
    VectorFieldT momentum_source;
    ScalarFieldT mass_source;
    VectorFieldT darcy_source;
    std::function<double(double)> s, sdot;
};

inline ManufacturedSolution manufactured_solution(const std::string& case_id,
                                                  const MaterialParameters& mat,
                                                  SMode smode = SMode::affine) {
    if (case_id != "ms1") throw std::invalid_argument("unknown manufactured case: " + case_id);
    const double lam = mat.lambda_lame, mu = mat.mu_lame, b = mat.biot_b;
    const double keta = mat.k_perm / mat.eta, inv_m = 1.0 / mat.biot_m;
    const double gfx = mat.rho_f * mat.gravity[0], gfy = mat.rho_f * mat.gravity[1];
    const double pi = M_PI;

    ManufacturedSolution ms;
    ms.s = [smode](double t) { return smode_value(smode, t); };
    ms.sdot = [smode](double t) { return smode_derivative(smode, t); };

    ms.p = [=](double x, double y, double t) { return std::cos(pi * x) * std::cos(pi * y) * smode_value(smode, t); };
    ms.u = [=](double x, double y, double t) -> std::array<double, 2> {
        const double v = std::sin(pi * x) * std::sin(pi * y) * smode_value(smode, t) / 10.0;
        return {v, v};
    };
    ms.q = [=](double x, double y, double t) -> std::array<double, 2> {
        const double s = smode_value(smode, t);
        return {-keta * (-pi * std::sin(pi * x) * std::cos(pi * y) * s - gfx),
                -keta * (-pi * std::cos(pi * x) * std::sin(pi * y) * s - gfy)};
    };
    // -div(C eps(u*) - b p* I): with phi = sin sin and psi = cos cos,
    // each component is s(t)/10 pi^2 [(3 mu + lam) phi - (lam + mu) psi]
    // plus the pressure gradient term + b dp*/dx_c.
    ms.momentum_source = [=](double x, double y, double t) -> std::array<double, 2> {
        const double s = smode_value(smode, t);
        const double phi = std::sin(pi * x) * std::sin(pi * y);
        const double psi = std::cos(pi * x) * std::cos(pi * y);
        const double elast = s / 10.0 * pi * pi * ((3.0 * mu + lam) * phi - (lam + mu) * psi);
        return {elast - b * pi * std::sin(pi * x) * std::cos(pi * y) * s,
                elast - b * pi * std::cos(pi * x) * std::sin(pi * y) * s};
    };
    // f = b div du*/dt + (1/M) dp*/dt + div q*
    ms.mass_source = [=](double x, double y, double t) {
        const double sd = smode_derivative(smode, t), s = smode_value(smode, t);
        const double psi = std::cos(pi * x) * std::cos(pi * y);
        const double divu = pi / 10.0 * (std::cos(pi * x) * std::sin(pi * y) + std::sin(pi * x) * std::cos(pi * y));
        return b * divu * sd + inv_m * psi * sd + 2.0 * pi * pi * keta * psi * s;
    };
    ms.darcy_source = [=](double, double, double) -> std::array<double, 2> { return {gfx, gfy}; };
    return ms;
}

// ---------------------------------------------------------------------------
// Problem presets
// ---------------------------------------------------------------------------

/// A complete benchmark definition: geometry, material, boundary spec,
/// initial fields, volume data and (when known) the exact solution.
struct ProblemSpec {
    std::string name;
    int nx = 8, ny = 8;
    double lx = 1.0, ly = 1.0;
    double T = 1.0;
    MaterialParameters mat;
    BoundarySpec bc;
    VolumeData data;
    VectorField init_u;  // initial fields for the march (projected weakly)
    ScalarField init_p;
    ExactSolution exact;
};

struct PresetOptions {
    MaterialConfig material;           // desk defaults
    double load = 1.0;                 // terzaghi applied load
    SMode smode = SMode::affine;       // ms1 temporal factor
    bool has_material = false;         // overrides the preset's default material
};

/// Presets addressable by name: "terzaghi", "ms1", "ms1-gravity".
inline ProblemSpec make_problem(const std::string& name, const PresetOptions& opt = {}) {
    ProblemSpec ps;
    ps.name = name;

    MaterialConfig mc = opt.material;
    if (name == "terzaghi") {
        ps.nx = 1;
        ps.ny = 32;
        ps.lx = 1.0 / 32.0;
        ps.ly = 1.0;
        ps.T = 0.6;
        ps.mat = material_from_config(mc);

        const double w = opt.load;
        // Column drained and loaded at the top, rollers on the sides,
        // roller base; no-flow everywhere except the top.
        ps.bc.set_displacement(FaceTag::left, DisplacementBC::roller_x());
        ps.bc.set_displacement(FaceTag::right, DisplacementBC::roller_x());
        ps.bc.set_displacement(FaceTag::bottom, DisplacementBC::roller_y());
        ps.bc.set_displacement(FaceTag::top, DisplacementBC::traction([w](double, double, double) {
            return std::array<double, 2>{0.0, -w};
        }));
        ps.bc.set_flow(FaceTag::left, FlowBC::no_flow());
        ps.bc.set_flow(FaceTag::right, FlowBC::no_flow());
        ps.bc.set_flow(FaceTag::bottom, FlowBC::no_flow());
        ps.bc.set_flow(FaceTag::top, FlowBC::pressure());

        const TerzaghiParams tz = make_terzaghi_params(ps.mat, ps.ly, w);
        const double H = ps.ly;
        ps.exact.available = true;
        // Depth is measured from the drained surface: z = H - y.
        ps.exact.p = [tz, H](double, double y, double t) {
            return t > 0.0 ? terzaghi_pressure(H - y, t, tz, 200) : tz.p_i;
        };
    } else if (name == "ms1" || name == "ms1-gravity") {
        if (name == "ms1-gravity" && !opt.has_material) {
            mc.gravity = {0.0, -1.0};
            mc.rho_f = 0.5;
        }
        ps.mat = material_from_config(mc);
        const ManufacturedSolution ms = manufactured_solution("ms1", ps.mat, opt.smode);

        ps.bc = BoundarySpec::all_fixed_pressure(ms.p);
        ps.data.momentum = ms.momentum_source;
        ps.data.darcy = ms.darcy_source;
        ps.data.mass = ms.mass_source;
        ps.init_u = [u = ms.u](double x, double y) { return u(x, y, 0.0); };
        ps.init_p = [p = ms.p](double x, double y) { return p(x, y, 0.0); };
        ps.exact.available = true;
        ps.exact.p = ms.p;
        ps.exact.u = ms.u;
        ps.exact.q = ms.q;
    } else {
        throw std::invalid_argument("unknown problem preset: " + name);
    }
    return ps;
}

inline DiscreteProblem discretize(const ProblemSpec& ps, double penalty_gamma = 10.0) {
    DiscreteProblem dp;
    dp.mesh = build_mesh(ps.nx, ps.ny, ps.lx, ps.ly);
    dp.dofs = build_dof_maps(dp.mesh);
    dp.ops = assemble_operators(dp.mesh, dp.dofs, ps.mat, penalty_gamma, ps.bc);
    dp.data = ps.data;
    dp.u_init = project_u(dp.mesh, dp.dofs, ps.init_u);
    dp.p_init = project_p(dp.mesh, dp.dofs, ps.init_p);
    return dp;
}

} // namespace porodg
