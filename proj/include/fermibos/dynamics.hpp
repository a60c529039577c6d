#pragma once
// Quasifree dynamics of collective excitations: each momentum block evolves
// independently under 2 kappa |k| curlyK(k) (the 1/hbar of the propagator
// cancels the hbar of the block Hamiltonian exactly).

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "bogoliubov.hpp"
#include "effham.hpp"
#include "energy.hpp"
#include "lattice.hpp"
#include "patches.hpp"
#include "permanent.hpp"
#include "potential.hpp"
#include "symfn.hpp"

namespace fermibos {

using ModeMap = std::map<Momentum, BogoliubovData>;

// diagonalize every half-space mode of the potential's support; modes with an
// empty index set are absent from the map
inline ModeMap diagonalize_all(const FermiSystem& sys, const PatchDecomposition& pd,
                               const PotentialSpec& pot) {
    ModeMap out;
    for (const Momentum& k : gamma_nor(pot)) {
        auto ms = index_sets(pd, sys, k);
        if (ms.dim() == 0) continue;
        auto mm = assemble_mode_matrices(sys, pd, ms, pot.value(k));
        out.emplace(k, diagonalize_mode(mm));
    }
    return out;
}

struct ExcitationWavefunction {
    std::map<Momentum, Eigen::VectorXcd> blocks;

    double norm2() const {
        double s = 0.0;
        for (const auto& [k, v] : blocks) s += v.squaredNorm();
        return s;
    }
    double norm() const { return std::sqrt(norm2()); }
    void normalize() {
        double n = norm();
        if (n == 0.0) throw config_error("cannot normalize the zero wavefunction");
        for (auto& [k, v] : blocks) v /= n;
    }
};

inline std::complex<double> inner(const ExcitationWavefunction& a,
                                  const ExcitationWavefunction& b) {
    std::complex<double> s = 0.0;
    for (const auto& [k, va] : a.blocks) {
        auto it = b.blocks.find(k);
        if (it != b.blocks.end()) s += va.dot(it->second); // Eigen dot conjugates the left factor
    }
    return s;
}

inline ExcitationWavefunction evolve(const ExcitationWavefunction& phi, double t,
                                     const ModeMap& bds) {
    ExcitationWavefunction out;
    for (const auto& [k, v] : phi.blocks) {
        auto it = bds.find(k);
        if (it == bds.end())
            throw config_error("wavefunction block at k=" + k.str() + " has no diagonalized mode");
        const BogoliubovData& bd = it->second;
        if (v.size() != bd.curlyK.rows())
            throw config_error("block at k=" + k.str() + " has length " + std::to_string(v.size()) +
                               ", mode dimension is " + std::to_string(bd.curlyK.rows()));
        auto se = sym_eig(bd.curlyK);
        double freq = 2.0 * kappa_const() * bd.absk;
        Eigen::VectorXcd phases(se.eval.size());
        for (int i = 0; i < se.eval.size(); ++i)
            phases(i) = std::exp(std::complex<double>(0.0, -freq * se.eval(i) * t));
        Eigen::MatrixXcd u = se.evec.cast<std::complex<double>>();
        out.blocks[k] = u * (phases.asDiagonal() * (u.adjoint() * v));
    }
    return out;
}

// energy expectation <phi, H_B phi> (phi need not be normalized)
inline double block_energy(const ExcitationWavefunction& phi, const ModeMap& bds,
                           const FermiSystem& sys) {
    double total = 0.0;
    for (const auto& [k, v] : phi.blocks) {
        const BogoliubovData& bd = bds.at(k);
        Eigen::VectorXd vr = v.real(), vi = v.imag();
        // <v, K v> is real for symmetric K; evaluate without a complex cast
        double quad = vr.dot(bd.curlyK * vr) + vi.dot(bd.curlyK * vi);
        total += 2.0 * sys.hbar * kappa_const() * bd.absk * quad;
    }
    return total;
}

struct StationaryState {
    ExcitationWavefunction phi;
    double energy = 0.0; // 2 hbar kappa |k| eigenvalue
    bool degenerate = false;
};

inline StationaryState stationary_state(const ModeMap& bds, const FermiSystem& sys, Momentum k,
                                        int level) {
    auto it = bds.find(k);
    if (it == bds.end()) throw config_error("no diagonalized mode at k=" + k.str());
    const BogoliubovData& bd = it->second;
    auto se = sym_eig(bd.curlyK);
    int n = int(se.eval.size());
    if (level < 0 || level >= n)
        throw config_error("level " + std::to_string(level) + " out of range for dimension " +
                           std::to_string(n));
    StationaryState st;
    st.phi.blocks[k] = se.evec.col(level).cast<std::complex<double>>();
    st.energy = 2.0 * sys.hbar * kappa_const() * bd.absk * se.eval(level);
    double scale = std::max(1.0, se.eval.cwiseAbs().maxCoeff());
    st.degenerate = (level > 0 && se.eval(level) - se.eval(level - 1) < 1e-10 * scale) ||
                    (level + 1 < n && se.eval(level + 1) - se.eval(level) < 1e-10 * scale);
    return st;
}

struct GramData {
    Eigen::MatrixXcd G;
    double Z_B_squared = 0.0;
};

inline Eigen::MatrixXcd gram_matrix(const std::vector<ExcitationWavefunction>& family) {
    int m = int(family.size());
    Eigen::MatrixXcd g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = inner(family[i], family[j]);
    return g;
}

inline GramData gram_and_Z(const std::vector<ExcitationWavefunction>& family) {
    int m = int(family.size());
    if (m < 1) throw config_error("empty excitation family");
    if (m > permanent_max_order)
        throw feasibility_error("family size " + std::to_string(m) + " exceeds permanent cap");
    GramData gd;
    gd.G = gram_matrix(family);
    std::complex<double> z2 = permanent(gd.G);
    if (std::fabs(z2.imag()) > 1e-10 * std::max(1.0, std::fabs(z2.real())))
        throw singularity_error("permanent of the Gram matrix has imaginary residue " +
                                std::to_string(z2.imag()));
    gd.Z_B_squared = z2.real();
    return gd;
}

inline double invariance_of_Z_under_evolution(const std::vector<ExcitationWavefunction>& family,
                                              double t, const ModeMap& bds) {
    double before = gram_and_Z(family).Z_B_squared;
    std::vector<ExcitationWavefunction> moved;
    moved.reserve(family.size());
    for (const auto& phi : family) moved.push_back(evolve(phi, t, bds));
    return std::fabs(gram_and_Z(moved).Z_B_squared - before);
}

inline std::complex<double> global_phase(double e_pw, double e_rpa, double t, double hbar) {
    return std::exp(std::complex<double>(0.0, -(e_pw + e_rpa) * t / hbar));
}

} // namespace fermibos
