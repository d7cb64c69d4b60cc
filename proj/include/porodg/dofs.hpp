#pragma once

#include <array>
#include <vector>

#include "porodg/mesh.hpp"

namespace porodg {

/// Degree-of-freedom layout for the lowest-order discretization:
///  - displacement: per-cell bilinear, 2 components, dof 8c + 2a + comp for
///    local node a in the order (0,0), (1,0), (0,1), (1,1);
///  - flux: one normal-flux dof per face, numbered by face index, oriented
///    along the stored face normal;
///  - pressure: one dof per cell, numbered by cell index.
struct DofMaps {
    int n_u = 0;
    int n_q = 0;
    int n_p = 0;
    std::vector<std::array<int, 8>> cell_u;  // per cell
    std::vector<std::array<int, 4>> cell_q;  // per cell, faces in {W, E, S, N} order
    std::vector<int> cell_p;
    std::vector<int> face_q;  // per face

    int u_dof(int cell, int node, int comp) const { return cell_u[cell][2 * node + comp]; }
};

inline DofMaps build_dof_maps(const Mesh& mesh) {
    DofMaps d;
    const int nc = mesh.n_cells();
    d.n_u = 8 * nc;
    d.n_q = mesh.n_faces();
    d.n_p = nc;

    d.cell_u.resize(nc);
    d.cell_q.resize(nc);
    d.cell_p.resize(nc);
    for (int c = 0; c < nc; ++c) {
        for (int k = 0; k < 8; ++k) d.cell_u[c][k] = 8 * c + k;
        d.cell_q[c] = mesh.cell_faces(c);
        d.cell_p[c] = c;
    }
    d.face_q.resize(d.n_q);
    for (int f = 0; f < d.n_q; ++f) d.face_q[f] = f;
    return d;
}

} // namespace porodg
