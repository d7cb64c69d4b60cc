#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "porodg/analysis.hpp"
#include "porodg/errors.hpp"

namespace porodg {

namespace detail {

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace detail

/// Legacy ASCII VTK structured-grid snapshot: cell pressure, cell
/// volumetric mean stress, cell-averaged flux vectors, and the per-cell
/// displacement averaged to the nodes (visualization only).
inline void write_vtk(const Mesh& mesh, const DofMaps& dofs, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& q, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& sigma_v, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("write_vtk: cannot open " + path);

    const int npx = mesh.nx + 1, npy = mesh.ny + 1;
    os << "# vtk DataFile Version 3.0\n";
    os << "porodg fields\n";
    os << "ASCII\n";
    os << "DATASET STRUCTURED_GRID\n";
    os << "DIMENSIONS " << npx << " " << npy << " 1\n";
    os << "POINTS " << npx * npy << " double\n";
    const double hx = mesh.hx(), hy = mesh.hy();
    for (int j = 0; j < npy; ++j)
        for (int i = 0; i < npx; ++i)
            os << detail::fmt17(i * hx) << " " << detail::fmt17(j * hy) << " 0\n";

    os << "CELL_DATA " << mesh.n_cells() << "\n";
    os << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c) os << detail::fmt17(p[c]) << "\n";
    os << "SCALARS sigma_v double 1\nLOOKUP_TABLE default\n";
    for (int c = 0; c < mesh.n_cells(); ++c) os << detail::fmt17(sigma_v[c]) << "\n";
    os << "VECTORS flux double\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        const auto qc = eval_flux(mesh, dofs, q, c, cell.cx(), cell.cy());
        os << detail::fmt17(qc[0]) << " " << detail::fmt17(qc[1]) << " 0\n";
    }

    // Node-averaged displacement over the adjacent cells.
    os << "POINT_DATA " << npx * npy << "\n";
    os << "VECTORS displacement double\n";
    std::vector<double> ux(npx * npy, 0.0), uy(npx * npy, 0.0);
    std::vector<int> cnt(npx * npy, 0);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const int ci = c % mesh.nx, cj = c / mesh.nx;
        const int corners[4] = {cj * npx + ci, cj * npx + ci + 1, (cj + 1) * npx + ci,
                                (cj + 1) * npx + ci + 1};
        for (int a = 0; a < 4; ++a) {
            ux[corners[a]] += u[dofs.u_dof(c, a, 0)];
            uy[corners[a]] += u[dofs.u_dof(c, a, 1)];
            cnt[corners[a]] += 1;
        }
    }
    for (int k = 0; k < npx * npy; ++k)
        os << detail::fmt17(ux[k] / cnt[k]) << " " << detail::fmt17(uy[k] / cnt[k]) << " 0\n";

    if (!os) throw IoError("write_vtk: write failed for " + path);
}

} // namespace porodg
