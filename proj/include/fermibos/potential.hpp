#pragma once
// Finitely supported interaction potential in momentum space, the half-space
// mode list Gamma^nor, and the plane-wave reference energy.

#include <map>
#include <string>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "momentum.hpp"

namespace fermibos {

// V-hat as a finite map k -> value >= 0.  The support is the key set; a zero
// value on a key is allowed (useful for switching the interaction off while
// keeping the geometry of the support).
class PotentialSpec {
public:
    PotentialSpec() = default;

    // strict=false symmetrizes a one-sided table (adds missing -k entries);
    // strict=true rejects asymmetric input.
    static PotentialSpec from_entries(std::map<Momentum, double> entries, bool strict,
                                      std::vector<std::string>* warnings = nullptr) {
        for (const auto& [k, v] : entries) {
            if (v < 0.0)
                throw config_error("potential value must be nonnegative at k=" + k.str());
        }
        std::map<Momentum, double> table = entries;
        for (const auto& [k, v] : entries) {
            auto it = table.find(-k);
            if (it == table.end()) {
                if (strict)
                    throw config_error("potential not symmetric: missing -k partner of " + k.str());
                table[-k] = v;
                if (warnings) warnings->push_back("potential symmetrized: added " + (-k).str());
            } else if (it->second != v) {
                throw config_error("potential not symmetric: V(k) != V(-k) at k=" + k.str());
            }
        }
        PotentialSpec spec;
        spec.table_ = std::move(table);
        return spec;
    }

    double value(Momentum k) const {
        auto it = table_.find(k);
        return it == table_.end() ? 0.0 : it->second;
    }
    bool in_support(Momentum k) const { return table_.count(k) != 0; }
    const std::map<Momentum, double>& table() const { return table_; }
    bool empty() const { return table_.empty(); }

    // Diameter of the support: max_{k,k' in supp} |k - k'|.
    double support_diameter() const {
        double d2max = 0.0;
        for (const auto& [a, va] : table_)
            for (const auto& [b, vb] : table_) {
                double d2 = static_cast<double>((a - b).norm2());
                if (d2 > d2max) d2max = d2;
            }
        return std::sqrt(d2max);
    }

    // Largest |k| over the support.
    double support_radius() const {
        double m2 = 0.0;
        for (const auto& [k, v] : table_)
            m2 = std::max(m2, static_cast<double>(k.norm2()));
        return std::sqrt(m2);
    }

private:
    std::map<Momentum, double> table_;
};

// One representative per +-k pair: k3 > 0, or (k3 = 0 and k2 > 0), or
// (k2 = k3 = 0 and k1 > 0).  Excludes 0.  Lexicographically sorted.
inline bool in_half_space(Momentum k) {
    if (k.z != 0) return k.z > 0;
    if (k.y != 0) return k.y > 0;
    return k.x > 0;
}

inline std::vector<Momentum> gamma_nor(const PotentialSpec& pot) {
    std::vector<Momentum> modes;
    for (const auto& [k, v] : pot.table())
        if (in_half_space(k)) modes.push_back(k);
    return modes; // map iteration is already lex-sorted
}

// Energy of the plane-wave Slater state:
//   hbar^2 sum_{p in B_F} |p|^2 + (N-1) V(0)/2 - (1/2N) sum_{k != 0} V(k) |B_F cap (B_F + k)|.
inline double hartree_fock_energy(const FermiSystem& sys, const PotentialSpec& pot) {
    std::vector<Momentum> ball = enumerate_fermi_ball(sys.kf);
    KahanSum kin;
    for (Momentum p : ball) kin.add(static_cast<double>(p.norm2()));
    double e = sys.hbar * sys.hbar * kin.value();
    double n = static_cast<double>(sys.num_particles);
    e += 0.5 * (n - 1.0) * pot.value(Momentum{0, 0, 0});
    KahanSum exch;
    for (const auto& [k, v] : pot.table()) {
        if (k.is_zero() || v == 0.0) continue;
        exch.add(v * static_cast<double>(shell_sets(sys, k).overlap_count));
    }
    e -= exch.value() / (2.0 * n);
    return e;
}

} // namespace fermibos
