#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "porodg/errors.hpp"
#include "porodg/march.hpp"

namespace porodg {

struct ConvergenceRow {
    double h;
    double tau;
    int r;
    double error_p;
    double error_u;
    double error_q;
};

/// Fixed-schema convergence table. Observed orders between consecutive rows
/// are log2 of the error ratios; the first row's order cells are empty.
inline void write_csv_convergence(const std::vector<ConvergenceRow>& rows, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("write_csv_convergence: need at least one row");
    std::ofstream os(path);
    if (!os) throw IoError("write_csv_convergence: cannot open " + path);
    os << "h,tau,r,error_p_L2L2,error_u_L2L2,error_q_L2L2,order_p,order_u,order_q\n";
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return std::string(buf);
    };
    auto ord = [&](double e_prev, double e_cur) {
        std::snprintf(buf, sizeof(buf), "%.3f", std::log2(e_prev / e_cur));
        return std::string(buf);
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ConvergenceRow& r = rows[i];
        os << num(r.h) << "," << num(r.tau) << "," << r.r << "," << num(r.error_p) << ","
           << num(r.error_u) << "," << num(r.error_q);
        if (i == 0)
            os << ",,,";
        else
            os << "," << ord(rows[i - 1].error_p, r.error_p) << ","
               << ord(rows[i - 1].error_u, r.error_u) << "," << ord(rows[i - 1].error_q, r.error_q);
        os << "\n";
    }
    if (!os) throw IoError("write_csv_convergence: write failed for " + path);
}

/// Per-block iteration log of a march. block_type is "1x1" or "2x2" for the
/// spectral method's transformed blocks; the fixed-stress method logs the
/// full coupled slab block as "(r+1)x(r+1)".
inline void write_iteration_log(const Trajectory& traj, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("write_iteration_log: cannot open " + path);
    os << "slab_index,t_n,block_index,block_type,gmres_iterations,fs_sweeps,final_residual\n";
    char buf[64];
    for (int n = 0; n < traj.partition.n_slabs(); ++n) {
        for (const BlockReport& br : traj.slabs[n].reports) {
            std::snprintf(buf, sizeof(buf), "%.12g", traj.partition.t_end(n));
            os << n << "," << buf << "," << br.block_index << "," << br.block_size << "x"
               << br.block_size << "," << br.gmres_iterations << "," << br.fs_sweeps << ",";
            std::snprintf(buf, sizeof(buf), "%.6e", br.report.final_relative_residual);
            os << buf << "\n";
        }
    }
    if (!os) throw IoError("write_iteration_log: write failed for " + path);
}

} // namespace porodg
