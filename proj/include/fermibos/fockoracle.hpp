#pragma once
// Exact small-instance oracles.  Part one diagonalizes the quadratic boson
// Hamiltonian on a number-truncated occupation basis and checks it against
// the closed-form ground constant and spectrum.  Part two is a fermionic
// CAR engine: states are sorted mode lists, signs are computed by inversion
// counting, so operator identities hold exactly in floating point.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "errors.hpp"
#include "patches.hpp"
#include "permanent.hpp"
#include "potential.hpp"
#include "util.hpp"

namespace fermibos {

// ---------------------------------------------------------------------------
// boson exact diagonalization
// ---------------------------------------------------------------------------

inline constexpr double boson_basis_budget = 2e5;

namespace detail {

// C(m + n_max, m) without overflow; the budget check runs before enumeration
inline double boson_basis_count(int modes, int n_max) {
    double c = 1.0;
    for (int j = 1; j <= modes; ++j) c *= double(n_max + j) / double(j);
    return c;
}

inline void enumerate_occupations(int modes, int budget, std::vector<std::vector<uint8_t>>& out) {
    std::vector<uint8_t> occ(modes, 0);
    int total = 0;
    for (;;) {
        out.push_back(occ);
        int i = modes - 1;
        while (i >= 0) {
            if (total < budget) {
                ++occ[i];
                ++total;
                break;
            }
            total -= occ[i];
            occ[i] = 0;
            --i;
        }
        if (i < 0) return;
    }
}

// lowest eigenvalues of a sparse symmetric matrix: Lanczos with full
// reorthogonalization, deflating each converged eigenvector in turn
inline std::vector<double> lanczos_lowest(const Eigen::SparseMatrix<double>& h, int n_eigs,
                                          double tol = 1e-11) {
    const int dim = int(h.rows());
    n_eigs = std::min(n_eigs, dim);
    std::vector<Eigen::VectorXd> locked;
    std::vector<double> values;
    auto project_out = [&](Eigen::VectorXd& w, const std::vector<Eigen::VectorXd>& basis, int count) {
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : locked) w -= q.dot(w) * q;
            for (int i = 0; i < count; ++i) w -= basis[i].dot(w) * basis[i];
        }
    };
    while (int(values.size()) < n_eigs) {
        std::mt19937_64 rng(0x5eedull + values.size());
        std::uniform_real_distribution<double> ud(-1.0, 1.0);
        Eigen::VectorXd v0(dim);
        for (int i = 0; i < dim; ++i) v0(i) = ud(rng);
        std::vector<Eigen::VectorXd> basis;
        project_out(v0, basis, 0);
        if (v0.norm() < 1e-12)
            throw singularity_error("Lanczos start vector collapsed after deflation");
        v0.normalize();
        basis.push_back(v0);
        std::vector<double> alpha, beta;
        const int j_max = std::min(dim - int(locked.size()), 350);
        Eigen::VectorXd ritz_vec;
        double ritz_val = 0.0;
        bool done = false;
        for (int j = 0; j < j_max && !done; ++j) {
            Eigen::VectorXd w = h * basis[j];
            alpha.push_back(basis[j].dot(w));
            project_out(w, basis, int(basis.size()));
            double b = w.norm();
            // tridiagonal Ritz problem for the current Krylov space
            int n = int(alpha.size());
            Eigen::VectorXd ad = Eigen::Map<const Eigen::VectorXd>(alpha.data(), n);
            Eigen::VectorXd bd(std::max(0, n - 1));
            for (int i = 0; i + 1 < n; ++i) bd(i) = beta[i];
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
            es.computeFromTridiagonal(ad, bd);
            double theta = es.eigenvalues()(0);
            double resid = b * std::fabs(es.eigenvectors()(n - 1, 0));
            double scale = std::max(1.0, std::fabs(theta));
            if (resid < tol * scale || b < 1e-13 || j + 1 == j_max) {
                if (resid >= 1e3 * tol * scale && b >= 1e-13)
                    throw singularity_error("Lanczos stalled at residual " + std::to_string(resid));
                ritz_vec = Eigen::VectorXd::Zero(dim);
                for (int i = 0; i < n; ++i) ritz_vec += es.eigenvectors()(i, 0) * basis[i];
                ritz_vec.normalize();
                ritz_val = theta;
                done = true;
                break;
            }
            beta.push_back(b);
            basis.push_back(w / b);
        }
        locked.push_back(ritz_vec);
        values.push_back(ritz_val);
    }
    std::sort(values.begin(), values.end());
    return values;
}

} // namespace detail

struct BosonEDResult {
    double ground_energy = 0.0;
    std::vector<double> low_spectrum; // ascending, starts at the ground level
    int basis_size = 0;
    bool stable = true; // A + B and A - B both positive definite
};

// h = sum A_ab c*_a c_b + (1/2) sum B_ab (c*_a c*_b + c_b c_a) on occupation
// states with total <= n_max; A, B symmetric, B = 0 rows allowed
inline BosonEDResult boson_ed_spectrum(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                       int n_max, int n_eigs = 8) {
    const int m = int(a.rows());
    if (a.cols() != m || b.rows() != m || b.cols() != m)
        throw config_error("boson_ed_spectrum needs square A and B of equal size");
    if (n_max < 0) throw config_error("n_max must be nonnegative");
    double asym = (a - a.transpose()).cwiseAbs().maxCoeff() +
                  (b - b.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * std::max(1.0, a.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff()))
        throw config_error("boson_ed_spectrum needs symmetric A and B");
    if (detail::boson_basis_count(m, n_max) > boson_basis_budget)
        throw feasibility_error("occupation basis exceeds " + std::to_string(boson_basis_budget) +
                                " states");

    BosonEDResult res;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> plus(a + b), minus(a - b);
    res.stable = plus.eigenvalues()(0) > 0.0 && minus.eigenvalues()(0) > 0.0;

    std::vector<std::vector<uint8_t>> states;
    detail::enumerate_occupations(m, n_max, states);
    res.basis_size = int(states.size());
    std::map<std::vector<uint8_t>, int> idx;
    for (int i = 0; i < res.basis_size; ++i) idx[states[i]] = i;

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<uint8_t> target;
    for (int j = 0; j < res.basis_size; ++j) {
        const auto& occ = states[j];
        int total = 0;
        double diag = 0.0;
        for (int al = 0; al < m; ++al) {
            total += occ[al];
            diag += a(al, al) * double(occ[al]);
        }
        trip.emplace_back(j, j, diag);
        for (int be = 0; be < m; ++be) {
            if (occ[be] == 0) continue;
            for (int al = 0; al < m; ++al) {
                if (al == be || a(al, be) == 0.0) continue;
                target = occ;
                --target[be];
                ++target[al];
                trip.emplace_back(idx.at(target), j,
                                  a(al, be) * std::sqrt(double(occ[be]) * double(occ[al] + 1)));
            }
        }
        for (int al = 0; al < m; ++al) {
            for (int be = 0; be < m; ++be) {
                if (b(al, be) == 0.0) continue;
                if (total + 2 <= n_max) { // c*_al c*_be
                    target = occ;
                    ++target[be];
                    double amp = std::sqrt(double(target[be]));
                    ++target[al];
                    amp *= std::sqrt(double(target[al]));
                    trip.emplace_back(idx.at(target), j, 0.5 * b(al, be) * amp);
                }
                if (occ[al] > 0 && occ[be] - (al == be ? 1 : 0) > 0) { // c_be c_al
                    target = occ;
                    double amp = std::sqrt(double(target[al]));
                    --target[al];
                    amp *= std::sqrt(double(target[be]));
                    --target[be];
                    trip.emplace_back(idx.at(target), j, 0.5 * b(al, be) * amp);
                }
            }
        }
    }
    Eigen::SparseMatrix<double> h(res.basis_size, res.basis_size);
    h.setFromTriplets(trip.begin(), trip.end());
    res.low_spectrum = detail::lanczos_lowest(h, n_eigs);
    res.ground_energy = res.low_spectrum.front();
    return res;
}

// ---------------------------------------------------------------------------
// fermionic CAR engine
// ---------------------------------------------------------------------------

// finite ordered mode table; the canonical order is lexicographic on (x,y,z)
struct ModeTable {
    std::vector<Momentum> modes;
    std::map<Momentum, int> index;
    int size() const { return int(modes.size()); }
    int find(Momentum p) const {
        auto it = index.find(p);
        return it == index.end() ? -1 : it->second;
    }
    int require(Momentum p) const {
        int i = find(p);
        if (i < 0) throw config_error("mode outside the engine window: " + p.str());
        return i;
    }
};

namespace detail {
inline ModeTable table_from(std::vector<Momentum> modes) {
    ModeTable mt;
    std::sort(modes.begin(), modes.end());
    mt.modes = std::move(modes);
    for (int i = 0; i < mt.size(); ++i) mt.index[mt.modes[i]] = i;
    if (mt.size() > 65535) throw feasibility_error("mode table exceeds uint16 indexing");
    return mt;
}
} // namespace detail

// particle-hole frame window: modes within radial distance `radius` of the
// Fermi sphere; covers every pair operator with |transfer| <= radius - rv slack
inline ModeTable shell_mode_table(const FermiSystem& sys, double radius) {
    if (radius <= 0.0) throw config_error("window radius must be positive");
    std::vector<Momentum> modes;
    int64_t box = int64_t(std::floor(sys.kf + radius)) + 1;
    double lo = std::max(0.0, sys.kf - radius), hi = sys.kf + radius;
    for (int64_t x = -box; x <= box; ++x)
        for (int64_t y = -box; y <= box; ++y)
            for (int64_t z = -box; z <= box; ++z) {
                double r2 = double(x * x + y * y + z * z);
                if (r2 >= lo * lo && r2 <= hi * hi) modes.push_back(Momentum{x, y, z});
            }
    return detail::table_from(std::move(modes));
}

// plain ball table |p| <= radius, for evaluations in the original frame
inline ModeTable ball_mode_table(double radius) {
    if (radius <= 0.0) throw config_error("window radius must be positive");
    std::vector<Momentum> modes;
    int64_t box = int64_t(std::floor(radius)) + 1;
    for (int64_t x = -box; x <= box; ++x)
        for (int64_t y = -box; y <= box; ++y)
            for (int64_t z = -box; z <= box; ++z)
                if (double(x * x + y * y + z * z) <= radius * radius)
                    modes.push_back(Momentum{x, y, z});
    return detail::table_from(std::move(modes));
}

using FermiState = std::vector<uint16_t>; // strictly increasing mode indices

struct FockVector {
    std::map<FermiState, std::complex<double>> amp;

    static FockVector vacuum() {
        FockVector v;
        v.amp[FermiState{}] = 1.0;
        return v;
    }
    double norm2() const {
        KahanSum s;
        for (const auto& [st, a] : amp) s.add(std::norm(a));
        return s.value();
    }
    double norm() const { return std::sqrt(norm2()); }
    double max_abs() const {
        double m = 0.0;
        for (const auto& [st, a] : amp) m = std::max(m, std::abs(a));
        return m;
    }
    void chop(double eps = 0.0) {
        for (auto it = amp.begin(); it != amp.end();)
            it = (std::abs(it->second) <= eps) ? amp.erase(it) : std::next(it);
    }
    FockVector& operator+=(const FockVector& o) {
        for (const auto& [st, a] : o.amp) amp[st] += a;
        return *this;
    }
    FockVector& operator-=(const FockVector& o) {
        for (const auto& [st, a] : o.amp) amp[st] -= a;
        return *this;
    }
    FockVector& operator*=(std::complex<double> c) {
        for (auto& [st, a] : amp) a *= c;
        return *this;
    }
};

inline std::complex<double> dot(const FockVector& x, const FockVector& y) {
    // conjugates the left factor; iterates the smaller map
    if (y.amp.size() < x.amp.size()) return std::conj(dot(y, x));
    std::complex<double> s = 0.0;
    for (const auto& [st, a] : x.amp) {
        auto it = y.amp.find(st);
        if (it != y.amp.end()) s += std::conj(a) * it->second;
    }
    return s;
}

namespace detail {

// sign (-1)^pos for inserting/removing mode i at sorted position pos;
// returns 0 on Pauli violation / empty mode
inline int create_into(FermiState& st, uint16_t i) {
    auto it = std::lower_bound(st.begin(), st.end(), i);
    if (it != st.end() && *it == i) return 0;
    int pos = int(it - st.begin());
    st.insert(it, i);
    return (pos % 2 == 0) ? 1 : -1;
}

inline int annihilate_from(FermiState& st, uint16_t i) {
    auto it = std::lower_bound(st.begin(), st.end(), i);
    if (it == st.end() || *it != i) return 0;
    int pos = int(it - st.begin());
    st.erase(it);
    return (pos % 2 == 0) ? 1 : -1;
}

} // namespace detail

// a*_p (dagger) or a_p applied with exact integer signs
inline FockVector fermion_apply(const ModeTable& mt, Momentum p, bool dagger,
                                const FockVector& v) {
    uint16_t i = uint16_t(mt.require(p));
    FockVector out;
    for (const auto& [st, a] : v.amp) {
        FermiState t = st;
        int s = dagger ? detail::create_into(t, i) : detail::annihilate_from(t, i);
        if (s != 0) out.amp[t] += double(s) * a;
    }
    out.chop();
    return out;
}

// number operator
inline FockVector count_excitations(const FockVector& v) {
    FockVector out;
    for (const auto& [st, a] : v.amp)
        if (!st.empty()) out.amp[st] = double(st.size()) * a;
    return out;
}

// one patch entry of a pair operator: the captured (particle, hole) pairs at
// a given transfer; list length is the capture count of the index set
struct PairList {
    int alpha = -1;
    Momentum transfer;
    std::vector<std::pair<Momentum, Momentum>> pairs; // (p, p - transfer)
    int64_t count() const { return int64_t(pairs.size()); }
    double n() const { return std::sqrt(double(pairs.size())); }
};

inline PairList patch_pairs(const PatchDecomposition& pd, const FermiSystem& sys, int alpha,
                            Momentum transfer) {
    if (alpha < 0 || alpha >= pd.num_patches)
        throw config_error("patch id out of range: " + std::to_string(alpha));
    PairList pl;
    pl.alpha = alpha;
    pl.transfer = transfer;
    ShellSets sh = shell_sets(sys, transfer);
    for (Momentum p : sh.ring)
        if (pd.patch_of(p) == alpha && pd.patch_of(p - transfer) == alpha)
            pl.pairs.emplace_back(p, p - transfer);
    return pl;
}

// pair lists for every entry of an index set: plus entries first at transfer
// +k, then the partner entries at transfer -k (the same layout as the mode
// matrices)
inline std::vector<PairList> mode_pair_lists(const PatchDecomposition& pd, const FermiSystem& sys,
                                             const ModeIndexSet& ms) {
    std::vector<PairList> out;
    out.reserve(size_t(ms.dim()));
    for (int i = 0; i < ms.half_dim(); ++i) out.push_back(patch_pairs(pd, sys, ms.plus[i], ms.k));
    for (int i = 0; i < ms.half_dim(); ++i) out.push_back(patch_pairs(pd, sys, ms.minus[i], -ms.k));
    for (int i = 0; i < ms.half_dim(); ++i) {
        if (out[size_t(i)].count() != ms.pair_count[size_t(i)] ||
            out[size_t(ms.half_dim() + i)].count() != ms.pair_count[size_t(i)])
            throw construction_error("pair enumeration disagrees with the index-set counts");
    }
    return out;
}

namespace detail {

// unnormalized pair creation sum a*_p a*_h: output amplitudes are exact
// integer combinations of the input amplitudes
inline FockVector raw_pair_apply(const ModeTable& mt, const PairList& pl, bool dagger,
                                 const FockVector& v) {
    FockVector out;
    for (const auto& [p, h] : pl.pairs) {
        uint16_t ip = uint16_t(mt.require(p)), ih = uint16_t(mt.require(h));
        for (const auto& [st, a] : v.amp) {
            FermiState t = st;
            int s;
            if (dagger) { // a*_p a*_h
                s = create_into(t, ih);
                if (s == 0) continue;
                int s2 = create_into(t, ip);
                if (s2 == 0) continue;
                s *= s2;
            } else { // a_h a_p
                s = annihilate_from(t, ip);
                if (s == 0) continue;
                int s2 = annihilate_from(t, ih);
                if (s2 == 0) continue;
                s *= s2;
            }
            out.amp[t] += double(s) * a;
        }
    }
    out.chop();
    return out;
}

} // namespace detail

// normalized pair operator c_alpha / c*_alpha
inline FockVector pair_operator_apply(const ModeTable& mt, const PairList& pl, bool dagger,
                                      const FockVector& v) {
    if (pl.pairs.empty())
        throw construction_error("pair operator with zero captured pairs at patch " +
                                 std::to_string(pl.alpha));
    FockVector out = detail::raw_pair_apply(mt, pl, dagger, v);
    out *= std::complex<double>(1.0 / pl.n());
    return out;
}

// [c_a, c_b] v for two annihilation-type pair operators; raw applications are
// composed first and scaled once, so exact integer cancellations survive
inline FockVector pair_commutator(const ModeTable& mt, const PairList& a, const PairList& b,
                                  const FockVector& v) {
    if (a.pairs.empty() || b.pairs.empty())
        throw construction_error("pair commutator needs nonempty pair lists");
    FockVector w = detail::raw_pair_apply(mt, a, false, detail::raw_pair_apply(mt, b, false, v));
    w -= detail::raw_pair_apply(mt, b, false, detail::raw_pair_apply(mt, a, false, v));
    w.chop();
    w *= std::complex<double>(1.0 / (a.n() * b.n()));
    return w;
}

// ([c_a, c*_b] - delta_ab delta_kl) v.  The Kronecker part is cancelled in
// raw integer arithmetic (the identity contributes exactly count-many copies
// of v), so a vanishing defect comes out as the exact zero vector.
inline FockVector ccr_defect_probe(const ModeTable& mt, const PairList& ca, const PairList& cb,
                                   const FockVector& v) {
    if (ca.pairs.empty() || cb.pairs.empty())
        throw construction_error("ccr probe needs nonempty pair lists");
    FockVector raw = detail::raw_pair_apply(mt, ca, false, detail::raw_pair_apply(mt, cb, true, v));
    raw -= detail::raw_pair_apply(mt, cb, true, detail::raw_pair_apply(mt, ca, false, v));
    bool same = ca.alpha == cb.alpha && ca.transfer == cb.transfer;
    if (same) {
        FockVector id = v;
        id *= std::complex<double>(double(ca.count()));
        raw -= id;
        raw.chop();
        raw *= std::complex<double>(1.0 / double(ca.count()));
    } else {
        raw.chop();
        raw *= std::complex<double>(1.0 / (ca.n() * cb.n()));
    }
    return raw;
}

// residual of  b(k) - sum_{alpha in I_k^+} n_alpha c_alpha(k) - leftover(k)
// applied to v.  The three operators enumerate the ring independently, so a
// zero residual certifies that captured pairs partition it.  Pairs captured
// by southern patches do not exist at transfer k (the hole would lie outside
// the ball), which is why only the plus side appears.
inline double pair_decomposition_check(const ModeTable& mt, const PatchDecomposition& pd,
                                       const FermiSystem& sys, Momentum k, const FockVector& v) {
    if (k.is_zero()) throw config_error("pair decomposition needs k != 0");
    ModeIndexSet ms = index_sets(pd, sys, k);
    std::vector<bool> in_plus(size_t(pd.num_patches), false);
    for (int a : ms.plus) in_plus[size_t(a)] = true;

    PairList full, leftover;
    full.transfer = leftover.transfer = k;
    for (Momentum p : shell_sets(sys, k).ring) {
        full.pairs.emplace_back(p, p - k);
        int a = pd.patch_of(p);
        if (!(a >= 0 && a == pd.patch_of(p - k) && in_plus[size_t(a)]))
            leftover.pairs.emplace_back(p, p - k);
    }
    FockVector resid = detail::raw_pair_apply(mt, full, false, v);
    for (int a : ms.plus)
        resid -= detail::raw_pair_apply(mt, patch_pairs(pd, sys, a, k), false, v);
    if (!leftover.pairs.empty()) resid -= detail::raw_pair_apply(mt, leftover, false, v);
    resid.chop();
    return resid.max_abs();
}

// ---------------------------------------------------------------------------
// normalization constants
// ---------------------------------------------------------------------------

// Z^2 = || prod_j ( sum_e phi_j(e) c*_e ) Omega ||^2 by monomial expansion:
// raw pair monomials have exact integer Gram entries, and diagonal terms are
// normalized by integer ratios, so single-entry families come out exact.
inline double fermionic_Zm(const ModeTable& mt, const std::vector<PairList>& entries,
                           const std::vector<Eigen::VectorXcd>& family) {
    const int m = int(family.size());
    if (m < 1) throw config_error("fermionic_Zm needs at least one factor");
    if (m > 4) throw feasibility_error("fermionic_Zm supports at most four factors");
    for (const auto& phi : family)
        if (phi.size() != int64_t(entries.size()))
            throw config_error("family coefficients must match the entry list");

    std::vector<std::vector<int>> supports(static_cast<size_t>(m));
    double amp_budget = 0.0;
    for (int j = 0; j < m; ++j) {
        double row = 0.0;
        for (int e = 0; e < int(entries.size()); ++e)
            if (family[size_t(j)](e) != std::complex<double>(0.0)) {
                supports[size_t(j)].push_back(e);
                row += double(entries[size_t(e)].count());
            }
        if (supports[size_t(j)].empty()) throw config_error("family member is the zero vector");
        amp_budget = (j == 0) ? row : amp_budget * row;
    }
    if (amp_budget > 2e6) throw feasibility_error("monomial expansion exceeds the sparse budget");

    // distinct monomials keyed by the sorted entry multiset
    std::map<std::vector<int>, FockVector> monomial;
    std::vector<int> pick(size_t(m), 0);
    std::vector<std::vector<int>> combos;
    for (;;) {
        std::vector<int> c(static_cast<size_t>(m));
        for (int j = 0; j < m; ++j) c[size_t(j)] = supports[size_t(j)][size_t(pick[size_t(j)])];
        combos.push_back(c);
        int j = m - 1;
        while (j >= 0 && ++pick[size_t(j)] == int(supports[size_t(j)].size())) pick[size_t(j--)] = 0;
        if (j < 0) break;
    }
    auto raw_state = [&](const std::vector<int>& c) -> const FockVector& {
        std::vector<int> key = c;
        std::sort(key.begin(), key.end());
        auto it = monomial.find(key);
        if (it == monomial.end()) {
            FockVector t = FockVector::vacuum();
            for (int e : key) t = detail::raw_pair_apply(mt, entries[size_t(e)], true, t);
            it = monomial.emplace(std::move(key), std::move(t)).first;
        }
        return it->second;
    };

    double z2 = 0.0;
    for (const auto& ca : combos) {
        for (const auto& cb : combos) {
            std::complex<double> w = 1.0;
            for (int j = 0; j < m; ++j)
                w *= std::conj(family[size_t(j)](ca[size_t(j)])) * family[size_t(j)](cb[size_t(j)]);
            if (w == std::complex<double>(0.0)) continue;
            std::complex<double> g = dot(raw_state(ca), raw_state(cb));
            if (g == std::complex<double>(0.0)) continue;
            if (ca == cb) {
                int64_t norm_int = 1;
                for (int j = 0; j < m; ++j) norm_int *= entries[size_t(ca[size_t(j)])].count();
                z2 += (w * g).real() / double(norm_int);
            } else {
                double rad = 1.0;
                for (int j = 0; j < m; ++j)
                    rad *= double(entries[size_t(ca[size_t(j)])].count()) *
                           double(entries[size_t(cb[size_t(j)])].count());
                z2 += (w * g).real() / std::sqrt(rad);
            }
        }
    }
    return z2;
}

// bosonic reference: permanent of the coefficient Gram matrix
inline double bosonic_Zm_reference(const std::vector<Eigen::VectorXcd>& family) {
    const int m = int(family.size());
    if (m < 1) throw config_error("bosonic_Zm_reference needs at least one factor");
    Eigen::MatrixXcd g(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) g(i, j) = family[size_t(i)].dot(family[size_t(j)]);
    return permanent(g).real();
}

// ---------------------------------------------------------------------------
// plane-wave energy by brute force
// ---------------------------------------------------------------------------

// <S, H S> for the filled Fermi ball in the original frame: the kinetic term
// plus (1/2N) sum_{k,p,q} V(k) a*_{p+k} a*_{q-k} a_q a_p, applied literally
inline double planewave_energy_brute(const FermiSystem& sys, const PotentialSpec& pot) {
    double reach = sys.kf + pot.support_radius();
    ModeTable mt = ball_mode_table(reach);
    std::vector<Momentum> ball = enumerate_fermi_ball(sys.kf);
    if (ball.size() > 40)
        throw feasibility_error("brute-force plane-wave energy is limited to tiny balls");
    FermiState filled;
    for (Momentum p : ball) filled.push_back(uint16_t(mt.require(p)));
    std::sort(filled.begin(), filled.end());
    FockVector slater;
    slater.amp[filled] = 1.0;

    KahanSum energy;
    for (Momentum p : ball) energy.add(sys.hbar * sys.hbar * double(p.norm2()));
    KahanSum inter;
    for (const auto& [k, vk] : pot.table()) {
        if (vk == 0.0) continue;
        for (Momentum p : ball) {
            FockVector w1 = fermion_apply(mt, p, false, slater);
            for (Momentum q : ball) {
                FockVector w2 = fermion_apply(mt, q, false, w1);
                if (w2.amp.empty()) continue;
                w2 = fermion_apply(mt, q - k, true, w2);
                if (w2.amp.empty()) continue;
                w2 = fermion_apply(mt, p + k, true, w2);
                auto it = w2.amp.find(filled);
                if (it != w2.amp.end()) inter.add(vk * it->second.real());
            }
        }
    }
    energy.add(inter.value() / (2.0 * double(sys.num_particles)));
    return energy.value();
}

} // namespace fermibos
