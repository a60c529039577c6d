#pragma once
// Fermi ball on Z^3, semiclassical constants, excitation dispersion, and the
// shell sets attached to a momentum transfer k.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "errors.hpp"
#include "momentum.hpp"
#include "util.hpp"

namespace fermibos {

// Membership rule for { p : |p| <= kF }.  When kF^2 sits within 1e-9 of an
// integer the comparison is done in exact integer arithmetic against the
// nearest integer, so boundary shells are included stably regardless of which
// side of the integer the floating-point noise fell on.
struct BallRule {
    double r2 = 0.0;
    int64_t r2_int = -1; // active when >= 0

    static BallRule from_kf(double kf) {
        BallRule rule;
        rule.r2 = kf * kf;
        double nearest = std::nearbyint(rule.r2);
        if (std::fabs(rule.r2 - nearest) < 1e-9) rule.r2_int = static_cast<int64_t>(nearest);
        return rule;
    }

    bool contains(Momentum p) const {
        int64_t n2 = p.norm2();
        if (r2_int >= 0) return n2 <= r2_int;
        return static_cast<double>(n2) <= r2;
    }
};

struct FermiSystem {
    double kf = 0.0;
    int64_t num_particles = 0; // N = |B_F|
    double kappa = 0.0;        // (3/4pi)^(1/3)
    double hbar = 0.0;         // kappa / kF
    BallRule rule;
};

inline double kappa_const() { return std::cbrt(3.0 / (4.0 * pi_v)); }

inline void check_enumeration_budget(double kf) {
    if (!(kf > 0.0)) throw config_error("kF must be positive, got " + std::to_string(kf));
    double predicted = (4.0 / 3.0) * pi_v * (kf + 1.0) * (kf + 1.0) * (kf + 1.0);
    if (predicted > 2147483648.0)
        throw feasibility_error("Fermi ball at kF=" + std::to_string(kf) +
                                " would exceed the 2^31-point enumeration budget");
}

// All lattice points with |p| <= kF, in lexicographic order.
inline std::vector<Momentum> enumerate_fermi_ball(double kf) {
    check_enumeration_budget(kf);
    BallRule rule = BallRule::from_kf(kf);
    int64_t box = static_cast<int64_t>(std::floor(kf)) + 1;
    std::vector<Momentum> ball;
    ball.reserve(static_cast<size_t>((4.0 / 3.0) * pi_v * kf * kf * kf) + 64);
    for (int64_t x = -box; x <= box; ++x)
        for (int64_t y = -box; y <= box; ++y)
            for (int64_t z = -box; z <= box; ++z) {
                Momentum p{x, y, z};
                if (rule.contains(p)) ball.push_back(p);
            }
    return ball;
}

inline FermiSystem semiclassical_params(double kf) {
    FermiSystem sys;
    sys.kf = kf;
    sys.rule = BallRule::from_kf(kf);
    sys.num_particles = static_cast<int64_t>(enumerate_fermi_ball(kf).size());
    sys.kappa = kappa_const();
    sys.hbar = sys.kappa / kf;
    return sys;
}

// Excitation energy e(p) = | hbar^2 |p|^2 - kappa^2 |, zero exactly on the
// Fermi sphere and positive for both particles and holes.
inline double dispersion(const FermiSystem& sys, Momentum p) {
    return std::fabs(sys.hbar * sys.hbar * static_cast<double>(p.norm2()) - sys.kappa * sys.kappa);
}

struct ShellSets {
    std::vector<Momentum> ring;  // B_F^c intersect (B_F + k): particle side
    std::vector<Momentum> holes; // h in B_F with h + k outside: hole side
    int64_t overlap_count = 0;   // |B_F intersect (B_F + k)|
};

inline ShellSets shell_sets(const FermiSystem& sys, Momentum k) {
    check_enumeration_budget(sys.kf);
    ShellSets out;
    int64_t box = static_cast<int64_t>(std::floor(sys.kf)) + 1;
    for (int64_t x = -box; x <= box; ++x)
        for (int64_t y = -box; y <= box; ++y)
            for (int64_t z = -box; z <= box; ++z) {
                Momentum h{x, y, z};
                if (!sys.rule.contains(h)) continue;
                Momentum p = h + k;
                if (!sys.rule.contains(p)) {
                    out.ring.push_back(p); // lex order in p follows lex order in h
                    out.holes.push_back(h);
                } else {
                    ++out.overlap_count; // p in B_F and p - k = h in B_F
                }
            }
    return out;
}

// Sum over the ring of 1/(e(p) + e(p-k)).  The denominator never vanishes for
// k != 0 because |p| > kF >= |p-k| forces e(p) + e(p-k) = hbar^2 (|p|^2 - |p-k|^2) > 0
// on the integer lattice; a guard is kept for pathological inputs.
inline double resolvent_sum(const FermiSystem& sys, Momentum k) {
    if (k.is_zero()) throw config_error("resolvent_sum requires k != 0");
    ShellSets sh = shell_sets(sys, k);
    KahanSum acc;
    for (size_t i = 0; i < sh.ring.size(); ++i) {
        double den = dispersion(sys, sh.ring[i]) + dispersion(sys, sh.holes[i]);
        if (den < 1e-14)
            throw singularity_error("vanishing pair energy at p=" + sh.ring[i].str());
        acc.add(1.0 / den);
    }
    return acc.value();
}

} // namespace fermibos
