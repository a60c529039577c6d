#pragma once
// Bogoliubov diagonalization of one effective mode Hamiltonian, three ways:
//   A. spectral route through E = (J^1/2 (D+W+W~) J^1/2)^1/2 with J = D+W-W~
//   B. hyperbolic reconstruction of the diagonalized block from cosh/sinh K
//   C. half-dimension block route exploiting the antipodal rank-one structure
// Routes B and C are cross-checks of A; they must agree to tight tolerance.

#include <Eigen/Dense>
#include <cmath>

#include "effham.hpp"
#include "errors.hpp"
#include "symfn.hpp"

namespace fermibos {

struct BogoliubovData {
    Momentum k;
    int dim = 0;
    double absk = 0.0;
    Eigen::MatrixXd E;      // positive spectrum matrix
    Eigen::MatrixXd S1, S2; // S2 = (S1^T)^-1
    Eigen::MatrixXd O;      // orthogonal polar factor of S1
    Eigen::MatrixXd K;      // symmetric kernel, K = (1/2) log(S1 S1^T)
    Eigen::MatrixXd curlyK; // O E O^T: coefficient matrix after the transform
    double ground_constant = 0.0; // (1/2) tr(E - D - W)
};

inline BogoliubovData diagonalize_mode(const ModeMatrices& mm) {
    BogoliubovData bd;
    bd.k = mm.k;
    bd.dim = mm.dim;
    bd.absk = mm.absk;
    Eigen::MatrixXd J = mm.D + mm.W - mm.Wt;
    Eigen::MatrixXd P = mm.D + mm.W + mm.Wt;
    Eigen::MatrixXd Jh = sym_sqrt(J, "D+W-W~");
    bd.E = sym_sqrt(symmetrize(Jh * P * Jh), "J^1/2 (D+W+W~) J^1/2");
    bd.S1 = Jh * sym_invsqrt(bd.E, "E");
    bd.S2 = bd.S1.transpose().partialPivLu().solve(
        Eigen::MatrixXd::Identity(mm.dim, mm.dim));
    bd.O = bd.S1 * sym_invsqrt(symmetrize(bd.S1.transpose() * bd.S1), "S1^T S1");
    bd.K = 0.5 * sym_log(symmetrize(bd.S1 * bd.S1.transpose()), "S1 S1^T");
    // With the right polar convention S1 = O|S1| the transformed coefficient
    // matrix is O E O^T (S1^T P S1 = E exactly, so e^K P e^K = O E O^T).
    bd.curlyK = symmetrize(bd.O * bd.E * bd.O.transpose());
    bd.ground_constant = 0.5 * (bd.E.trace() - mm.D.trace() - mm.W.trace());
    return bd;
}

// Route B: rebuild the transformed coefficient matrix from hyperbolic
// functions of K and the raw blocks.
inline Eigen::MatrixXd curlyK_hyperbolic(const ModeMatrices& mm, const BogoliubovData& bd) {
    Eigen::MatrixXd C = sym_cosh(bd.K);
    Eigen::MatrixXd S = sym_sinh(bd.K);
    Eigen::MatrixXd A = mm.D + mm.W;
    return symmetrize(C * A * C + S * A * S + C * mm.Wt * S + S * mm.Wt * C);
}

// Hyperbolic split of the transform itself: cosh K = (S1+S2) O^T / 2 and
// sinh K = (S1-S2) O^T / 2.
struct HyperbolicSplit {
    Eigen::MatrixXd cosh_k, sinh_k;
};

inline HyperbolicSplit hyperbolic_split(const BogoliubovData& bd) {
    return {symmetrize(0.5 * (bd.S1 + bd.S2) * bd.O.transpose()),
            symmetrize(0.5 * (bd.S1 - bd.S2) * bd.O.transpose())};
}

// Route C: with d the diagonal half-block and b the rank-one half-block,
//   L1 = d^1/2 (d^1/2 (d+2b) d^1/2)^-1/2 d^1/2 - 1   (<= 0)
//   L2 = (d+2b)^1/2 ((d+2b)^1/2 d (d+2b)^1/2)^-1/2 (d+2b)^1/2 - 1   (>= 0)
// and K reassembles as (1/2) [[K1+K2, K1-K2], [K1-K2, K1+K2]] with
// K_i = (1/2) log(L_i + 1).
struct BlockRoute {
    Eigen::MatrixXd K, L1, L2;
};

inline BlockRoute block_route_K(const ModeMatrices& mm) {
    BlockComponents bc = block_components(mm);
    int h = mm.dim / 2;
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(h, h);
    Eigen::MatrixXd dm = bc.d.asDiagonal();
    Eigen::MatrixXd q = dm + 2.0 * bc.b;
    Eigen::MatrixXd dh = bc.d.cwiseSqrt().asDiagonal();
    BlockRoute br;
    br.L1 = symmetrize(dh * sym_invsqrt(symmetrize(dh * q * dh), "d^1/2 (d+2b) d^1/2") * dh) - I;
    Eigen::MatrixXd qh = sym_sqrt(q, "d+2b");
    br.L2 = symmetrize(qh * sym_invsqrt(symmetrize(qh * dm * qh), "(d+2b)^1/2 d (d+2b)^1/2") * qh) - I;
    Eigen::MatrixXd K1 = 0.5 * sym_log(symmetrize(br.L1 + I), "L1 + 1");
    Eigen::MatrixXd K2 = 0.5 * sym_log(symmetrize(br.L2 + I), "L2 + 1");
    br.K.resize(mm.dim, mm.dim);
    br.K.topLeftCorner(h, h) = 0.5 * (K1 + K2);
    br.K.bottomRightCorner(h, h) = 0.5 * (K1 + K2);
    br.K.topRightCorner(h, h) = 0.5 * (K1 - K2);
    br.K.bottomLeftCorner(h, h) = 0.5 * (K1 - K2);
    return br;
}

// Conjugate the doubled quadratic form by the hyperbolic transform and report
// how far the result is from block-diagonal with both blocks equal to curlyK,
// plus the normal-ordering trace bookkeeping residual.
struct QuadraticFormCheck {
    double offdiag = 0.0;  // pairing blocks after the transform
    double diag = 0.0;     // deviation of diagonal blocks from curlyK
    double constant = 0.0; // |(tr G11 - tr(D+W))/2 - ground_constant|
};

inline QuadraticFormCheck quadratic_form_check(const ModeMatrices& mm, const BogoliubovData& bd) {
    int n = mm.dim;
    Eigen::MatrixXd C = sym_cosh(bd.K);
    Eigen::MatrixXd S = sym_sinh(bd.K);
    Eigen::MatrixXd A = mm.D + mm.W;
    Eigen::MatrixXd trans(2 * n, 2 * n), ham(2 * n, 2 * n);
    trans << C, S, S, C;
    ham << A, mm.Wt, mm.Wt, A;
    Eigen::MatrixXd G = trans.transpose() * ham * trans;
    QuadraticFormCheck qc;
    qc.offdiag = std::max(G.topRightCorner(n, n).norm(), G.bottomLeftCorner(n, n).norm());
    qc.diag = std::max((G.topLeftCorner(n, n) - bd.curlyK).norm(),
                       (G.bottomRightCorner(n, n) - bd.curlyK).norm());
    qc.constant = std::fabs(0.5 * (G.topLeftCorner(n, n).trace() - A.trace()) - bd.ground_constant);
    return qc;
}

} // namespace fermibos
