#pragma once
// RPA correlation energy two ways: the discrete trace formula summed over the
// half-space modes, and the closed integral formula summed over the support of
// the potential.  The convergence sweep ties the two together.

#include <cmath>
#include <map>
#include <vector>

#include "bogoliubov.hpp"
#include "effham.hpp"
#include "lattice.hpp"
#include "patches.hpp"
#include "potential.hpp"
#include "quadrature.hpp"
#include "util.hpp"

namespace fermibos {

// u(lambda) = 1 - lambda*arctan(1/lambda), decreasing from 1 to 0.  The direct
// form cancels catastrophically for large lambda; switch to the tail series
// u = 1/(3 l^2) - 1/(5 l^4) + ... once it converges faster than the rounding.
inline double u_lambda(double lambda) {
    if (lambda < 2.0) return 1.0 - lambda * std::atan(1.0 / lambda);
    double inv2 = 1.0 / (lambda * lambda);
    double term = inv2, sum = 0.0;
    for (int j = 1; j < 60; ++j) {
        double add = term / (2 * j + 1);
        sum += (j % 2 ? add : -add);
        if (add < 1e-18 * std::fabs(sum)) break;
        term *= inv2;
    }
    return sum;
}

// integral of u over [0, inf); exact value pi/4
inline IntegralResult u_integral(double abs_tol = 1e-12) {
    return integrate_semi_infinite([](double l) { return u_lambda(l); }, abs_tol);
}

// One k-term of the integral formula with the first order subtracted:
//   (1/pi) * integral of log(1 + c u) - c u,  c = 2 pi kappa vhat.
// Since the integral of u alone is exactly pi/4, this equals the literal
// (1/pi) integral log(1 + c u) - (pi/2) kappa vhat without the cancellation.
inline double rpa_k_term(double vhat, double abs_tol = 1e-12) {
    if (vhat == 0.0) return 0.0;
    double c = 2.0 * pi_v * kappa_const() * vhat;
    auto integrand = [c](double l) {
        double cu = c * u_lambda(l);
        return std::log1p(cu) - cu;
    };
    return integrate_semi_infinite(integrand, abs_tol).value / pi_v;
}

inline double rpa_integral_energy(const FermiSystem& sys, const PotentialSpec& pot,
                                  double abs_tol = 1e-12) {
    KahanSum total;
    for (const auto& [k, vhat] : pot.table()) {
        if (k.is_zero()) continue; // |k| factor kills the term
        total.add(std::sqrt(double(k.norm2())) * rpa_k_term(vhat, abs_tol));
    }
    return sys.hbar * kappa_const() * total.value();
}

struct ModeEnergyTerm {
    Momentum k;
    double trace_term = 0.0;   // tr(E - D - W)
    double contribution = 0.0; // hbar kappa |k| * trace_term
    bool skipped = false;      // empty index set: the mode carries no pairs
};

struct EnergyReport {
    double E_trace = 0.0;
    double E_integral = 0.0;
    double diff = 0.0;
    std::vector<ModeEnergyTerm> per_k;
    int64_t num_particles = 0;
    int num_patches = 0;
    double delta = 0.0;
};

inline double rpa_trace_energy(const FermiSystem& sys, const PatchDecomposition& pd,
                               const PotentialSpec& pot, std::vector<ModeEnergyTerm>* per_k = nullptr) {
    KahanSum total;
    for (const Momentum& k : gamma_nor(pot)) {
        double vhat = pot.value(k);
        if (vhat == 0.0) continue;
        ModeEnergyTerm term;
        term.k = k;
        auto ms = index_sets(pd, sys, k);
        if (ms.dim() == 0) {
            term.skipped = true;
        } else {
            auto mm = assemble_mode_matrices(sys, pd, ms, vhat);
            auto bd = diagonalize_mode(mm);
            term.trace_term = 2.0 * bd.ground_constant;
            term.contribution = sys.hbar * kappa_const() * std::sqrt(double(k.norm2())) * term.trace_term;
            total.add(term.contribution);
        }
        if (per_k) per_k->push_back(term);
    }
    return total.value();
}

inline EnergyReport energy_report(const FermiSystem& sys, const PatchDecomposition& pd,
                                  const PotentialSpec& pot, double delta) {
    EnergyReport rep;
    rep.E_trace = rpa_trace_energy(sys, pd, pot, &rep.per_k);
    rep.E_integral = rpa_integral_energy(sys, pot);
    rep.diff = std::fabs(rep.E_trace - rep.E_integral);
    rep.num_particles = sys.num_particles;
    rep.num_patches = pd.num_patches;
    rep.delta = delta;
    return rep;
}

// round N^(4 delta) to the nearest even integer, never below 2
inline int auto_patch_count(int64_t num_particles, double delta) {
    double m = std::pow(double(num_particles), 4.0 * delta);
    int even = 2 * int(std::llround(0.5 * m));
    return even < 2 ? 2 : even;
}

// right-hand side of the trace/integral comparison bound, constant dropped:
//   hbar (N^{-d/2} + M^{-1/4} N^{d/2} + M^{1/4} N^{-1/6 + d/2})
inline double sweep_bound_rhs(const FermiSystem& sys, int num_patches, double delta) {
    double n = double(sys.num_particles), m = double(num_patches);
    return sys.hbar * (std::pow(n, -0.5 * delta) + std::pow(m, -0.25) * std::pow(n, 0.5 * delta) +
                       std::pow(m, 0.25) * std::pow(n, -1.0 / 6.0 + 0.5 * delta));
}

struct SweepRow {
    double kf = 0.0;
    int64_t num_particles = 0;
    int num_patches = 0;
    double delta = 0.0;
    double E_trace = 0.0;
    double E_integral = 0.0;
    double diff = 0.0;
    double diff_over_hbar = 0.0;
    double bound_rhs = 0.0;
};

inline std::vector<SweepRow> convergence_sweep(const std::vector<double>& kf_list,
                                               const PotentialSpec& pot, double delta,
                                               double rv, int num_patches_override = 0) {
    std::vector<SweepRow> rows;
    rows.reserve(kf_list.size());
    for (double kf : kf_list) {
        auto sys = semiclassical_params(kf);
        int m = num_patches_override > 0 ? num_patches_override
                                         : auto_patch_count(sys.num_particles, delta);
        auto pd = build_patch_decomposition(sys, m, delta, rv);
        auto rep = energy_report(sys, pd, pot, delta);
        SweepRow row;
        row.kf = kf;
        row.num_particles = sys.num_particles;
        row.num_patches = m;
        row.delta = delta;
        row.E_trace = rep.E_trace;
        row.E_integral = rep.E_integral;
        row.diff = rep.diff;
        row.diff_over_hbar = rep.diff / sys.hbar;
        row.bound_rhs = sweep_bound_rhs(sys, m, delta);
        rows.push_back(row);
    }
    return rows;
}

} // namespace fermibos
