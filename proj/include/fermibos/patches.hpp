#pragma once
// Decomposition of the Fermi-surface shell into M antipodally paired angular
// patches separated by corridors, plus the per-mode index sets I_k^+/- and the
// pair counts that feed the effective Hamiltonians.
//
// Northern construction: a polar cap plus latitude bands of equal polar width,
// each band cut into longitude slices so patch solid angles stay within a
// factor 2 of 4pi/M.  Slice origins are staggered band-to-band by the golden
// angle so that no lattice direction is systematically orthogonal to every
// patch center.  The southern half is the exact reflection through the origin,
// so B_{alpha + M/2} = -B_alpha holds set-exactly and the patch centers
// satisfy omega[partner] = -omega[alpha] bit-for-bit.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "errors.hpp"
#include "lattice.hpp"
#include "momentum.hpp"
#include "util.hpp"

namespace fermibos {

struct Patch {
    int id = -1;
    std::array<double, 3> omega{0, 0, 0}; // unit center direction
    double solid_angle = 0.0;
    std::vector<Momentum> members; // lex-sorted shell points
};

namespace detail {
inline constexpr double golden_angle = 2.399963229728653; // pi (3 - sqrt 5)

struct BandLayout {
    std::vector<double> theta_edge; // size R+1, theta_edge[0]=0, theta_edge[R]=pi/2
    std::vector<int> slices;        // patches per band, slices[0]=1 (cap)
    std::vector<int> first_id;      // id of slice 0 in each band
    std::vector<double> phi0;       // longitude origin per band
};

inline BandLayout plan_bands(int half) {
    BandLayout bl;
    int rings = 1;
    if (half > 1) rings = std::max(2, static_cast<int>(std::lround(std::sqrt(double(half)))));
    if (half - 1 < rings - 1)
        throw construction_error("cannot place " + std::to_string(half) +
                                 " northern patches into " + std::to_string(rings) + " bands");
    bl.theta_edge.resize(rings + 1);
    for (int j = 0; j <= rings; ++j) bl.theta_edge[j] = (pi_v / 2.0) * double(j) / double(rings);
    std::vector<double> ideal(rings);
    for (int j = 0; j < rings; ++j)
        ideal[j] = double(half) * (std::cos(bl.theta_edge[j]) - std::cos(bl.theta_edge[j + 1]));
    bl.slices.assign(rings, 1);
    for (int j = 1; j < rings; ++j) bl.slices[j] = std::max<int>(1, std::lround(ideal[j]));
    // nudge band slice counts until they sum to `half`, touching the band
    // whose patch size is currently farthest from the target
    auto total = [&] { int t = 0; for (int m : bl.slices) t += m; return t; };
    int guard = 0;
    while (total() != half) {
        if (++guard > 4 * half + 16)
            throw construction_error("band slice balancing failed for M/2=" + std::to_string(half));
        int jbest = -1;
        double score = -1e300;
        bool need_more = total() < half;
        for (int j = 1; j < rings; ++j) {
            double s = need_more ? ideal[j] / bl.slices[j] : bl.slices[j] / ideal[j];
            if (s > score && (need_more || bl.slices[j] > 1)) {
                score = s;
                jbest = j;
            }
        }
        if (jbest < 0)
            throw construction_error("band slice balancing stuck for M/2=" + std::to_string(half));
        bl.slices[jbest] += need_more ? 1 : -1;
    }
    bl.first_id.resize(rings);
    int id = 0;
    for (int j = 0; j < rings; ++j) {
        bl.first_id[j] = id;
        id += bl.slices[j];
    }
    bl.phi0.resize(rings);
    for (int j = 0; j < rings; ++j) {
        double raw = std::fmod(golden_angle * double(j), 2.0 * pi_v);
        bl.phi0[j] = raw < 0 ? raw + 2.0 * pi_v : raw;
    }
    return bl;
}
} // namespace detail

class PatchDecomposition {
public:
    int num_patches = 0;    // M
    int half = 0;           // M/2
    double delta = 0.0;
    double rv = 0.0;             // radial shell half-thickness (diam supp V-hat)
    double corridor_width = 0.0; // 2 rv + 1, lattice units
    double corridor_angle = 0.0; // (corridor_width/2)/kF, radians
    double kf = 0.0;
    int64_t num_particles = 0;
    std::vector<Patch> patches; // ids 0..M-1; partner(a) = (a + M/2) % M
    int64_t shell_points = 0;
    int64_t assigned_points = 0;
    std::vector<std::string> warnings;

    int partner(int alpha) const { return (alpha + half) % num_patches; }

    // patch id for a lattice point, or -1 (outside shell / in a corridor)
    int patch_of(Momentum p) const {
        auto it = assign_.find(p);
        return it == assign_.end() ? -1 : it->second;
    }

    double dot_center(Momentum k, int alpha) const {
        const auto& w = patches[alpha].omega;
        return double(k.x) * w[0] + double(k.y) * w[1] + double(k.z) * w[2];
    }

    friend PatchDecomposition build_patch_decomposition(const FermiSystem&, int, double, double);

private:
    detail::BandLayout layout_;
    std::unordered_map<Momentum, int, MomentumHash> assign_;

    // assignment of one shell point; -1 for corridor points. north==true means
    // the point itself is northern; q is the unit vector folded to the north.
    int classify(double qx, double qy, double qz) const {
        double theta = std::acos(std::clamp(qz, -1.0, 1.0));
        int rings = static_cast<int>(layout_.slices.size());
        // latitude boundaries: interior edges and the equator
        for (int j = 1; j <= rings; ++j)
            if (std::fabs(theta - layout_.theta_edge[j]) < corridor_angle) return -1;
        int band = rings - 1;
        for (int j = 0; j < rings; ++j)
            if (theta < layout_.theta_edge[j + 1]) { band = j; break; }
        int m = layout_.slices[band];
        if (m == 1) return layout_.first_id[band];
        double w = 2.0 * pi_v / double(m);
        double phi = std::atan2(qy, qx);
        double rel = std::fmod(phi - layout_.phi0[band], 2.0 * pi_v);
        if (rel < 0) rel += 2.0 * pi_v;
        int slice = std::min(m - 1, static_cast<int>(rel / w));
        double sin_theta = std::sin(theta);
        for (double bnd : {layout_.phi0[band] + w * slice, layout_.phi0[band] + w * (slice + 1)}) {
            double d = std::asin(std::clamp(sin_theta * std::fabs(std::sin(phi - bnd)), 0.0, 1.0));
            if (d < corridor_angle) return -1;
        }
        return layout_.first_id[band] + slice;
    }
};

inline PatchDecomposition build_patch_decomposition(const FermiSystem& sys, int num_patches,
                                                    double delta, double rv) {
    if (num_patches < 2 || num_patches % 2 != 0)
        throw config_error("M must be even and >= 2, got " + std::to_string(num_patches));
    if (!(delta > 0.0 && delta < 1.0 / 6.0))
        throw config_error("delta must lie in (0, 1/6), got " + std::to_string(delta));
    if (!(rv > 0.0)) throw construction_error("shell thickness R_V must be positive");

    PatchDecomposition pd;
    pd.num_patches = num_patches;
    pd.half = num_patches / 2;
    pd.delta = delta;
    pd.rv = rv;
    pd.corridor_width = 2.0 * rv + 1.0;
    pd.corridor_angle = 0.5 * pd.corridor_width / sys.kf;
    pd.kf = sys.kf;
    pd.num_particles = sys.num_particles;
    pd.layout_ = detail::plan_bands(pd.half);

    double n = double(sys.num_particles);
    if (double(num_patches) < std::pow(n, 2.0 * delta) ||
        double(num_patches) > std::pow(n, 2.0 / 3.0 - 2.0 * delta))
        pd.warnings.push_back("M=" + std::to_string(num_patches) +
                              " outside the recommended band [N^(2 delta), N^(2/3 - 2 delta)]");

    // centers and solid angles
    pd.patches.resize(num_patches);
    int rings = static_cast<int>(pd.layout_.slices.size());
    for (int j = 0; j < rings; ++j) {
        double c0 = std::cos(pd.layout_.theta_edge[j]);
        double c1 = std::cos(pd.layout_.theta_edge[j + 1]);
        int m = pd.layout_.slices[j];
        for (int l = 0; l < m; ++l) {
            int id = pd.layout_.first_id[j] + l;
            Patch& pa = pd.patches[id];
            pa.id = id;
            pa.solid_angle = 2.0 * pi_v * (c0 - c1) / double(m);
            if (j == 0) {
                pa.omega = {0.0, 0.0, 1.0};
            } else {
                double ct = 0.5 * (c0 + c1);
                double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
                double phi = pd.layout_.phi0[j] + (2.0 * pi_v / double(m)) * (double(l) + 0.5);
                pa.omega = {st * std::cos(phi), st * std::sin(phi), ct};
            }
            double ratio = pa.solid_angle / (4.0 * pi_v / double(num_patches));
            if (ratio >= 2.0 || ratio <= 0.5)
                throw construction_error("patch " + std::to_string(id) + " solid angle off target by x" +
                                         std::to_string(ratio) + " at M=" + std::to_string(num_patches));
        }
    }
    for (int a = 0; a < pd.half; ++a) {
        Patch& ps = pd.patches[a + pd.half];
        const Patch& pn = pd.patches[a];
        ps.id = a + pd.half;
        ps.omega = {-pn.omega[0], -pn.omega[1], -pn.omega[2]};
        ps.solid_angle = pn.solid_angle;
    }

    // member assignment over the radial shell; south = exact mirror of north
    int64_t box = static_cast<int64_t>(std::ceil(sys.kf + rv));
    for (int64_t x = -box; x <= box; ++x)
        for (int64_t y = -box; y <= box; ++y)
            for (int64_t z = -box; z <= box; ++z) {
                Momentum p{x, y, z};
                if (p.is_zero()) continue;
                double r = std::sqrt(double(p.norm2()));
                if (std::fabs(r - sys.kf) > rv) continue;
                ++pd.shell_points;
                if (z == 0 && (x != 0 || y != 0)) {
                    // equator points are corridor points unless the corridor
                    // has zero width, which cannot happen (width >= 1)
                    continue;
                }
                bool north = z > 0;
                double s = north ? 1.0 : -1.0;
                int a = pd.classify(s * double(x) / r, s * double(y) / r, s * double(z) / r);
                if (a < 0) continue;
                if (!north) a += pd.half;
                pd.assign_.emplace(p, a);
                pd.patches[a].members.push_back(p);
                ++pd.assigned_points;
            }
    return pd;
}

// Index sets and pair counts for one mode k.  Basis convention for all mode
// matrices: rows 0..h-1 are the I_k^+ patches in ascending id order, row i+h
// is the antipodal partner of row i.  A patch with zero captured pairs is
// dropped together with its partner (exact mirror symmetry guarantees the
// partner count is identical).
struct ModeIndexSet {
    Momentum k;
    double threshold = 0.0;           // N^-delta
    std::vector<int> plus;            // I_k^+, ascending patch id
    std::vector<int> minus;           // partner(plus[i]) at position i
    std::vector<int64_t> pair_count;  // n_alpha(k)^2 for plus[i] (= same for minus[i])
    std::vector<int> dropped;         // I_k^+ patches discarded for zero pairs
    int half_dim() const { return static_cast<int>(plus.size()); }
    int dim() const { return 2 * half_dim(); }
    double n(int i) const { return std::sqrt(double(pair_count[i])); }
};

// capture counts per patch: ring points p with p and p-k inside one patch
inline std::vector<int64_t> capture_counts(const PatchDecomposition& pd, const FermiSystem& sys,
                                           Momentum k, const ShellSets& sh) {
    std::vector<int64_t> cap(pd.num_patches, 0);
    for (Momentum p : sh.ring) {
        int a = pd.patch_of(p);
        if (a >= 0 && a == pd.patch_of(p - k)) ++cap[a];
    }
    return cap;
}

inline ModeIndexSet index_sets(const PatchDecomposition& pd, const FermiSystem& sys, Momentum k) {
    ModeIndexSet ms;
    ms.k = k;
    ms.threshold = std::pow(double(sys.num_particles), -pd.delta);
    ShellSets sh = shell_sets(sys, k);
    std::vector<int64_t> cap = capture_counts(pd, sys, k, sh);
    for (int a = 0; a < pd.num_patches; ++a) {
        if (pd.dot_center(k, a) >= ms.threshold) {
            if (cap[a] > 0) {
                ms.plus.push_back(a);
                ms.minus.push_back(pd.partner(a));
                ms.pair_count.push_back(cap[a]);
            } else {
                ms.dropped.push_back(a);
            }
        }
    }
    return ms;
}

// relative deviations |n^2 M / (4 pi kF^2 |k.omega|) - 1| over I_k^+
inline std::vector<double> counting_law_check(const PatchDecomposition& pd, const FermiSystem& sys,
                                              const ModeIndexSet& ms) {
    std::vector<double> dev;
    dev.reserve(ms.plus.size());
    for (size_t i = 0; i < ms.plus.size(); ++i) {
        double law = 4.0 * pi_v * sys.kf * sys.kf / double(pd.num_patches) *
                     std::fabs(pd.dot_center(ms.k, ms.plus[i]));
        dev.push_back(std::fabs(double(ms.pair_count[i]) / law - 1.0));
    }
    return dev;
}

// ring partition into captured pairs, the soft ribbon Y, and the remainder
struct RibbonSets {
    std::vector<Momentum> corridor;   // U: ring points not captured inside any single patch
    std::vector<Momentum> ribbon;     // Y: ring points with e(p)+e(p-k) <= 4 N^(-1/3-delta)
    std::vector<Momentum> hard_part;  // U \ Y
    int64_t ring_size = 0;
    int64_t captured = 0;
};

inline RibbonSets corridor_ribbon_sets(const PatchDecomposition& pd, const FermiSystem& sys,
                                       Momentum k) {
    RibbonSets rs;
    ShellSets sh = shell_sets(sys, k);
    rs.ring_size = static_cast<int64_t>(sh.ring.size());
    double ecut = 4.0 * std::pow(double(sys.num_particles), -1.0 / 3.0 - pd.delta);
    for (size_t i = 0; i < sh.ring.size(); ++i) {
        Momentum p = sh.ring[i];
        bool in_y = dispersion(sys, p) + dispersion(sys, sh.holes[i]) <= ecut;
        if (in_y) rs.ribbon.push_back(p);
        int a = pd.patch_of(p);
        if (a >= 0 && a == pd.patch_of(p - k)) {
            ++rs.captured;
            continue;
        }
        rs.corridor.push_back(p);
        if (!in_y) rs.hard_part.push_back(p);
    }
    return rs;
}

} // namespace fermibos
