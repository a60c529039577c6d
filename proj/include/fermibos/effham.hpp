#pragma once
// Per-mode effective quadratic Hamiltonian coefficient matrices.
//
// Basis: rows 0..h-1 are the I_k^+ patches (ascending id); row i+h is the
// antipodal partner of row i.  In this ordering D = diag(d,d), W = diag(b,b),
// W-tilde = antidiag(b,b) with the same half-blocks on both sides because the
// mirrored pair counts coincide exactly.

#include <Eigen/Dense>
#include <cmath>

#include "errors.hpp"
#include "lattice.hpp"
#include "patches.hpp"

namespace fermibos {

struct ModeMatrices {
    Momentum k;
    int dim = 0; // 2h
    double vk = 0.0;   // V-hat(k)
    double absk = 0.0; // |k|
    double g = 0.0;    // kappa V-hat(k) / 2
    Eigen::MatrixXd D, W, Wt;
    Eigen::VectorXd u; // sqrt |k-hat . omega_alpha|
    Eigen::VectorXd v; // (hbar / (kappa sqrt |k|)) n_alpha(k)
};

inline ModeMatrices assemble_mode_matrices(const FermiSystem& sys, const PatchDecomposition& pd,
                                           const ModeIndexSet& ms, double vhat_k) {
    if (ms.dim() == 0)
        throw empty_mode_error("index set empty for k=" + ms.k.str());
    ModeMatrices mm;
    mm.k = ms.k;
    mm.dim = ms.dim();
    mm.vk = vhat_k;
    mm.absk = std::sqrt(double(ms.k.norm2()));
    mm.g = 0.5 * sys.kappa * vhat_k;
    int h = ms.half_dim();
    mm.D = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    mm.W = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    mm.Wt = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    mm.u.resize(mm.dim);
    mm.v.resize(mm.dim);
    double coef = vhat_k / (2.0 * sys.hbar * sys.kappa * double(sys.num_particles) * mm.absk);
    for (int i = 0; i < h; ++i) {
        double dabs = std::fabs(pd.dot_center(ms.k, ms.plus[i])) / mm.absk;
        mm.D(i, i) = dabs;
        mm.D(i + h, i + h) = dabs;
        mm.u(i) = std::sqrt(dabs);
        mm.u(i + h) = mm.u(i);
        double vi = sys.hbar / (sys.kappa * std::sqrt(mm.absk)) * ms.n(i);
        mm.v(i) = vi;
        mm.v(i + h) = vi;
    }
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < h; ++j) {
            double w = coef * ms.n(i) * ms.n(j);
            mm.W(i, j) = w;
            mm.W(i + h, j + h) = w;
            mm.Wt(i, j + h) = w;
            mm.Wt(i + h, j) = w;
        }
    return mm;
}

struct HsNorms {
    double d = 0.0, w = 0.0, wt = 0.0;
};

inline HsNorms hs_norm_check(const PatchDecomposition& pd, const ModeMatrices& mm) {
    HsNorms ns{mm.D.norm(), mm.W.norm(), mm.Wt.norm()};
    if (ns.d > std::sqrt(double(pd.num_patches)) + 1e-12)
        throw singularity_error("||D||_HS exceeds sqrt(M) for k=" + mm.k.str());
    if (std::fabs(ns.w - ns.wt) > 1e-12 * std::max(1.0, ns.w))
        throw singularity_error("||W||_HS != ||W~||_HS for k=" + mm.k.str());
    return ns;
}

struct BlockComponents {
    Eigen::VectorXd d;      // diagonal of the D half-block
    Eigen::MatrixXd b;      // rank-one W half-block
    Eigen::VectorXd v_half; // first half of v
};

inline BlockComponents block_components(const ModeMatrices& mm) {
    int h = mm.dim / 2;
    BlockComponents bc;
    bc.d = mm.D.diagonal().head(h);
    bc.b = mm.W.topLeftCorner(h, h);
    bc.v_half = mm.v.head(h);
    Eigen::MatrixXd D2 = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    D2.topLeftCorner(h, h) = bc.d.asDiagonal();
    D2.bottomRightCorner(h, h) = bc.d.asDiagonal();
    Eigen::MatrixXd W2 = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    W2.topLeftCorner(h, h) = bc.b;
    W2.bottomRightCorner(h, h) = bc.b;
    Eigen::MatrixXd Wt2 = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    Wt2.topRightCorner(h, h) = bc.b;
    Wt2.bottomLeftCorner(h, h) = bc.b;
    double res = (D2 - mm.D).norm() + (W2 - mm.W).norm() + (Wt2 - mm.Wt).norm();
    if (res > 1e-14)
        throw construction_error("antipodal block structure violated for k=" + mm.k.str());
    return bc;
}

} // namespace fermibos
