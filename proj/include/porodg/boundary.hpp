#pragma once

#include <array>
#include <functional>
#include <optional>
#include <stdexcept>

#include "porodg/mesh.hpp"

namespace porodg {

using ScalarFieldT = std::function<double(double, double, double)>;               // (x, y, t)
using VectorFieldT = std::function<std::array<double, 2>(double, double, double)>;

inline double eval_or_zero(const ScalarFieldT& f, double x, double y, double t) {
    return f ? f(x, y, t) : 0.0;
}

inline std::array<double, 2> eval_or_zero(const VectorFieldT& f, double x, double y, double t) {
    return f ? f(x, y, t) : std::array<double, 2>{0.0, 0.0};
}

/// Displacement condition on one boundary tag, split per component so that
/// roller supports (normal component fixed, tangential traction-free) are
/// expressible on axis-aligned faces. Dirichlet data must be constant in
/// time; only the prescribed traction may depend on t.
struct DisplacementBC {
    std::array<bool, 2> dirichlet = {false, false};
    VectorFieldT dirichlet_data;  // used for components with dirichlet[c]
    VectorFieldT traction_data;   // used for the remaining components

    static DisplacementBC fixed(VectorFieldT data = {}) {
        DisplacementBC b;
        b.dirichlet = {true, true};
        b.dirichlet_data = std::move(data);
        return b;
    }
    static DisplacementBC traction(VectorFieldT data = {}) {
        DisplacementBC b;
        b.traction_data = std::move(data);
        return b;
    }
    /// u_x fixed, y-traction prescribed (vertical roller), and vice versa.
    static DisplacementBC roller_x(VectorFieldT traction = {}) {
        DisplacementBC b;
        b.dirichlet = {true, false};
        b.traction_data = std::move(traction);
        return b;
    }
    static DisplacementBC roller_y(VectorFieldT traction = {}) {
        DisplacementBC b;
        b.dirichlet = {false, true};
        b.traction_data = std::move(traction);
        return b;
    }
};

/// Flow condition on one boundary tag: either a prescribed pressure
/// (natural in the mixed Darcy row) or a prescribed outward normal flux
/// (essential on the face flux dof).
struct FlowBC {
    enum class Kind { pressure, normal_flux };
    Kind kind = Kind::pressure;
    ScalarFieldT data;  // p_D or q.n_outward

    static FlowBC pressure(ScalarFieldT d = {}) { return {Kind::pressure, std::move(d)}; }
    static FlowBC no_flow() { return {Kind::normal_flux, {}}; }
    static FlowBC normal_flux(ScalarFieldT d) { return {Kind::normal_flux, std::move(d)}; }
};

struct BoundarySpec {
    std::array<std::optional<DisplacementBC>, 4> displacement;  // indexed by tag - 1
    std::array<std::optional<FlowBC>, 4> flow;

    static int tag_slot(FaceTag t) {
        if (t == FaceTag::interior) throw std::invalid_argument("boundary spec: interior tag");
        return static_cast<int>(t) - 1;
    }

    void set_displacement(FaceTag t, DisplacementBC bc) { displacement[tag_slot(t)] = std::move(bc); }
    void set_flow(FaceTag t, FlowBC bc) { flow[tag_slot(t)] = std::move(bc); }

    const DisplacementBC& displacement_on(FaceTag t) const { return *displacement[tag_slot(t)]; }
    const FlowBC& flow_on(FaceTag t) const { return *flow[tag_slot(t)]; }

    void validate() const {
        static const char* names[4] = {"left", "right", "bottom", "top"};
        for (int s = 0; s < 4; ++s) {
            if (!displacement[s])
                throw std::invalid_argument(std::string("boundary spec: no displacement condition on ") + names[s]);
            if (!flow[s])
                throw std::invalid_argument(std::string("boundary spec: no flow condition on ") + names[s]);
        }
    }

    /// All-around homogeneous fixed displacement + prescribed pressure.
    static BoundarySpec all_fixed_pressure(ScalarFieldT p = {}) {
        BoundarySpec b;
        for (FaceTag t : {FaceTag::left, FaceTag::right, FaceTag::bottom, FaceTag::top}) {
            b.set_displacement(t, DisplacementBC::fixed());
            b.set_flow(t, FlowBC::pressure(p));
        }
        return b;
    }
};

} // namespace porodg
