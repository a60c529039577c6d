#include <catch2/catch_amalgamated.hpp>

#include <fermibos/bogoliubov.hpp>
#include <fermibos/fockoracle.hpp>

#include <random>

using namespace fermibos;
using cd = std::complex<double>;

namespace {

ModeMatrices make_synth(const Eigen::VectorXd& d, double g, const Eigen::VectorXd& v) {
    int h = int(d.size());
    ModeMatrices mm;
    mm.k = Momentum{0, 0, 1};
    mm.dim = 2 * h;
    mm.vk = 2.0 * g / kappa_const();
    mm.absk = 1.0;
    mm.g = g;
    Eigen::MatrixXd b = g * v * v.transpose();
    mm.D = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    mm.W = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    mm.Wt = Eigen::MatrixXd::Zero(mm.dim, mm.dim);
    mm.D.topLeftCorner(h, h) = d.asDiagonal();
    mm.D.bottomRightCorner(h, h) = d.asDiagonal();
    mm.W.topLeftCorner(h, h) = b;
    mm.W.bottomRightCorner(h, h) = b;
    mm.Wt.topRightCorner(h, h) = b;
    mm.Wt.bottomLeftCorner(h, h) = b;
    mm.u = mm.D.diagonal().cwiseSqrt();
    mm.v.resize(mm.dim);
    mm.v << v, v;
    return mm;
}

struct HemiWorld {
    FermiSystem sys;
    PatchDecomposition pd;
    ModeTable mt;
    HemiWorld(double kf)
        : sys(semiclassical_params(kf)),
          pd(build_patch_decomposition(sys, 2, 2.0 / 45.0, 2.0)),
          mt(shell_mode_table(sys, 3.0)) {}
};

// dyadic amplitudes keep every accumulation exact, so identity tests can
// compare against the literal zero vector
FockVector dyadic_state(const ModeTable& mt, uint64_t seed, int n_states, int max_modes) {
    static const cd pool[] = {cd(1.0), cd(-1.0), cd(0.5), cd(-0.75), cd(0.0, 1.0),
                              cd(0.0, -0.5), cd(1.0, 0.25), cd(-0.5, 0.5)};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> mode(0, mt.size() - 1);
    std::uniform_int_distribution<int> nmodes(0, max_modes);
    std::uniform_int_distribution<int> coin(0, 7);
    FockVector v;
    for (int s = 0; s < n_states; ++s) {
        FermiState st;
        for (int j = nmodes(rng); j > 0; --j) st.push_back(uint16_t(mode(rng)));
        std::sort(st.begin(), st.end());
        st.erase(std::unique(st.begin(), st.end()), st.end());
        v.amp[st] += pool[coin(rng)];
    }
    v.chop();
    return v;
}

} // namespace

TEST_CASE("occupation basis size and budget guard", "[fockoracle]") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(4, 4);
    auto res = boson_ed_spectrum(a, b, 12, 1);
    CHECK(res.basis_size == 1820); // C(16,4)
    CHECK(res.ground_energy == Catch::Approx(0.0).margin(1e-9));
    auto tiny = boson_ed_spectrum(a, b, 0, 1);
    CHECK(tiny.basis_size == 1);
    CHECK_THROWS_AS(boson_ed_spectrum(Eigen::MatrixXd::Identity(6, 6),
                                      Eigen::MatrixXd::Zero(6, 6), 40, 1),
                    feasibility_error);
    CHECK_THROWS_AS(boson_ed_spectrum(a, Eigen::MatrixXd::Zero(3, 3), 4, 1), config_error);
}

TEST_CASE("number conserving spectrum is sums of eigenvalues", "[fockoracle]") {
    Eigen::MatrixXd a(2, 2);
    a << 1.0, 0.3, 0.3, 1.6;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(2, 2);
    auto es = sym_eig(a);
    double e1 = es.eval(0), e2 = es.eval(1);
    auto res = boson_ed_spectrum(a, b, 8, 6);
    CHECK(res.stable);
    std::vector<double> expect = {0.0, e1, e2, 2 * e1, e1 + e2, std::min(2 * e2, 3 * e1)};
    std::sort(expect.begin(), expect.end());
    for (int i = 0; i < 6; ++i)
        CHECK(res.low_spectrum[size_t(i)] == Catch::Approx(expect[size_t(i)]).margin(1e-9));
}

TEST_CASE("instability is flagged", "[fockoracle]") {
    Eigen::MatrixXd a = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd b(2, 2);
    b << 0.0, 0.9, 0.9, 0.0;
    auto res = boson_ed_spectrum(a, b, 4, 1);
    CHECK_FALSE(res.stable);
}

TEST_CASE("ground constant and gaps against exact diagonalization", "[fockoracle]") {
    Eigen::VectorXd d(2), v(2);
    d << 0.9, 1.2;
    v << 0.8, 0.6;
    ModeMatrices mm = make_synth(d, 0.05, v);
    BogoliubovData bd = diagonalize_mode(mm);
    auto espec = sym_eig(bd.E).eval;

    auto res = boson_ed_spectrum(mm.D + mm.W, mm.Wt, 12, 5);
    CHECK(res.stable);
    CHECK(std::fabs(res.ground_energy - bd.ground_constant) < 1e-6);
    // one-boson levels sit at ground + eig(E); the lowest two-boson level
    // 2 min(E) lies above max(E) here, so the first five are unambiguous
    REQUIRE(2.0 * espec(0) > espec(3));
    for (int i = 0; i < 4; ++i) {
        double gap = res.low_spectrum[size_t(i + 1)] - res.ground_energy;
        CHECK(std::fabs(gap - espec(i)) < 1e-6);
    }
    // variational: ground decreases as the cutoff grows
    double g6 = boson_ed_spectrum(mm.D + mm.W, mm.Wt, 6, 1).ground_energy;
    double g8 = boson_ed_spectrum(mm.D + mm.W, mm.Wt, 8, 1).ground_energy;
    CHECK(g6 >= g8 - 1e-13);
    CHECK(g8 >= res.ground_energy - 1e-13);
    CHECK(bd.ground_constant <= res.ground_energy + 1e-7);
}

TEST_CASE("energy chain matches the exact boson ground state at dim two", "[fockoracle]") {
    Eigen::VectorXd d(1), v(1);
    d << 1.0;
    v << 1.0;
    ModeMatrices mm = make_synth(d, 0.08, v);
    BogoliubovData bd = diagonalize_mode(mm);
    auto res = boson_ed_spectrum(mm.D + mm.W, mm.Wt, 16, 1);
    CHECK(std::fabs(res.ground_energy - bd.ground_constant) < 1e-8);
}

TEST_CASE("mode tables are sorted windows", "[fockoracle]") {
    auto sys = semiclassical_params(4.0);
    ModeTable mt = shell_mode_table(sys, 2.0);
    CHECK(std::is_sorted(mt.modes.begin(), mt.modes.end()));
    for (Momentum p : mt.modes) {
        double r = std::sqrt(double(p.norm2()));
        CHECK(std::fabs(r - sys.kf) <= 2.0 + 1e-12);
    }
    CHECK(mt.find(Momentum{0, 0, 4}) >= 0);
    CHECK(mt.find(Momentum{0, 0, 0}) < 0);
    CHECK_THROWS_AS(mt.require(Momentum{0, 0, 0}), config_error);
    ModeTable ball = ball_mode_table(2.0);
    CHECK(ball.size() == 33);
}

TEST_CASE("elementary operators satisfy the CAR exactly", "[fockoracle]") {
    HemiWorld w(4.0);
    std::vector<Momentum> probes = {Momentum{0, 0, 4}, Momentum{0, 0, 5}, Momentum{3, 0, 3},
                                    Momentum{0, -4, 1}, Momentum{2, 2, 2}};
    for (uint64_t seed : {7ull, 8ull, 9ull}) {
        FockVector v = dyadic_state(w.mt, seed, 8, 5);
        for (Momentum p : probes) {
            // Pauli
            FockVector pp = fermion_apply(w.mt, p, true, fermion_apply(w.mt, p, true, v));
            CHECK(pp.amp.empty());
            for (Momentum q : probes) {
                // {a_p, a*_q} = delta_pq
                FockVector anti = fermion_apply(w.mt, q, true, fermion_apply(w.mt, p, false, v));
                anti += fermion_apply(w.mt, p, false, fermion_apply(w.mt, q, true, v));
                if (p == q) anti -= v;
                anti.chop();
                CHECK(anti.max_abs() == 0.0);
                // a*_p a*_q = -a*_q a*_p
                FockVector fw = fermion_apply(w.mt, p, true, fermion_apply(w.mt, q, true, v));
                fw += fermion_apply(w.mt, q, true, fermion_apply(w.mt, p, true, v));
                fw.chop();
                CHECK(fw.max_abs() == 0.0);
            }
        }
    }
    CHECK(fermion_apply(w.mt, probes[0], false, FockVector::vacuum()).amp.empty());
}

TEST_CASE("pair lists agree with the index-set counts", "[fockoracle]") {
    HemiWorld w(8.0);
    Momentum k{0, 0, 1};
    auto ms = index_sets(w.pd, w.sys, k);
    REQUIRE(ms.half_dim() == 1);
    auto entries = mode_pair_lists(w.pd, w.sys, ms);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].count() == 177); // northern capture at kF=8, rv=2
    CHECK(entries[1].count() == 177); // mirror patch at transfer -k
    CHECK(entries[0].n() == ms.n(0));
    for (const auto& [p, h] : entries[0].pairs) {
        CHECK(w.sys.rule.contains(h));
        CHECK_FALSE(w.sys.rule.contains(p));
        CHECK(p - k == h);
    }
}

TEST_CASE("pair operators create and annihilate exactly", "[fockoracle]") {
    HemiWorld w(8.0);
    Momentum k{0, 0, 1};
    auto entries = mode_pair_lists(w.pd, w.sys, index_sets(w.pd, w.sys, k));
    const PairList& top = entries[0];

    CHECK(pair_operator_apply(w.mt, top, false, FockVector::vacuum()).amp.empty());

    FockVector raw = detail::raw_pair_apply(w.mt, top, true, FockVector::vacuum());
    CHECK(int64_t(raw.amp.size()) == top.count());
    for (const auto& [st, a] : raw.amp) {
        CHECK(st.size() == 2); // pair operators move the number by exactly two
        CHECK((a == cd(1.0) || a == cd(-1.0)));
    }
    CHECK(dot(raw, raw).real() == double(top.count()));
    CHECK(dot(raw, raw).real() / double(top.count()) == 1.0);

    FockVector norm1 = pair_operator_apply(w.mt, top, true, FockVector::vacuum());
    CHECK(std::fabs(dot(norm1, norm1).real() - 1.0) < 1e-13);

    FockVector two = detail::raw_pair_apply(w.mt, top, true, raw);
    for (const auto& [st, a] : two.amp) CHECK(st.size() == 4);

    PairList empty;
    empty.alpha = 0;
    CHECK_THROWS_AS(pair_operator_apply(w.mt, empty, true, FockVector::vacuum()),
                    construction_error);
}

TEST_CASE("pair annihilators commute exactly", "[fockoracle]") {
    HemiWorld w(8.0);
    Momentum k{0, 0, 1};
    PairList north = patch_pairs(w.pd, w.sys, 0, k);
    PairList south = patch_pairs(w.pd, w.sys, 1, -k);
    PairList north2 = patch_pairs(w.pd, w.sys, 0, Momentum{0, 0, 2});
    REQUIRE(north.count() > 0);
    REQUIRE(south.count() > 0);
    REQUIRE(north2.count() > 0);

    // two-pair states with dyadic coefficients
    FockVector base = detail::raw_pair_apply(
        w.mt, south, true, detail::raw_pair_apply(w.mt, north, true, FockVector::vacuum()));
    for (auto pr : {std::pair<const PairList&, const PairList&>{north, south},
                    {north, north2},
                    {south, north2}}) {
        FockVector comm = pair_commutator(w.mt, pr.first, pr.second, base);
        CHECK(comm.max_abs() == 0.0);
    }
}

TEST_CASE("commutator defect carries the Kronecker deltas exactly", "[fockoracle]") {
    HemiWorld w(8.0);
    Momentum k{0, 0, 1};
    PairList north = patch_pairs(w.pd, w.sys, 0, k);
    PairList south = patch_pairs(w.pd, w.sys, 1, -k);

    // E annihilates the vacuum: recorded, not assumed
    FockVector on_vac = ccr_defect_probe(w.mt, north, north, FockVector::vacuum());
    CHECK(on_vac.amp.empty());

    // distinct patches: defect is the exact zero vector on any state
    FockVector one = detail::raw_pair_apply(w.mt, north, true, FockVector::vacuum());
    FockVector mixed = detail::raw_pair_apply(w.mt, south, true, one);
    for (const FockVector* v : {&one, &mixed}) {
        FockVector off = ccr_defect_probe(w.mt, north, south, *v);
        CHECK(off.max_abs() == 0.0);
    }

    // same patch on a one-pair state: Pauli blocking makes the defect nonzero
    FockVector diag = ccr_defect_probe(w.mt, north, north, one);
    CHECK(diag.max_abs() > 0.0);
}

TEST_CASE("defect size shrinks with the Fermi momentum", "[fockoracle]") {
    Momentum k{0, 0, 1};
    auto ratio = [&](double kf) {
        HemiWorld w(kf);
        PairList north = patch_pairs(w.pd, w.sys, 0, k);
        FockVector one = pair_operator_apply(w.mt, north, true, FockVector::vacuum());
        FockVector defect = ccr_defect_probe(w.mt, north, north, one);
        return defect.norm() / count_excitations(one).norm();
    };
    double r5 = ratio(5.0), r8 = ratio(8.0), r11 = ratio(11.0);
    CHECK(r5 > r8);
    CHECK(r8 > r11);
}

TEST_CASE("captured pairs partition the ring", "[fockoracle]") {
    HemiWorld w(8.0);
    for (Momentum k : {Momentum{0, 0, 1}, Momentum{0, 0, -1}, Momentum{0, 1, 1}}) {
        CHECK(pair_decomposition_check(w.mt, w.pd, w.sys, k, FockVector::vacuum()) == 0.0);
        FockVector v = dyadic_state(w.mt, 31ull + uint64_t(k.z + 2), 10, 6);
        CHECK(pair_decomposition_check(w.mt, w.pd, w.sys, k, v) == 0.0);
    }

    // a pair captured by the northern patch is annihilated identically by
    // b(k) and by the patch operator
    Momentum k{0, 0, 1};
    PairList north = patch_pairs(w.pd, w.sys, 0, k);
    auto [p0, h0] = north.pairs.front();
    FockVector pairst = fermion_apply(w.mt, p0, true, fermion_apply(w.mt, h0, true, FockVector::vacuum()));
    PairList full;
    full.transfer = k;
    for (Momentum p : shell_sets(w.sys, k).ring) full.pairs.emplace_back(p, p - k);
    FockVector d1 = detail::raw_pair_apply(w.mt, full, false, pairst);
    d1 -= detail::raw_pair_apply(w.mt, north, false, pairst);
    d1.chop();
    CHECK(d1.max_abs() == 0.0);

    // a corridor pair is caught by b(k) but by no patch operator
    Momentum pc;
    bool found = false;
    for (Momentum p : shell_sets(w.sys, k).ring) {
        int a = w.pd.patch_of(p);
        if (!(a >= 0 && a == w.pd.patch_of(p - k))) {
            pc = p;
            found = true;
            break;
        }
    }
    REQUIRE(found);
    FockVector corr =
        fermion_apply(w.mt, pc, true, fermion_apply(w.mt, pc - k, true, FockVector::vacuum()));
    CHECK(detail::raw_pair_apply(w.mt, full, false, corr).amp.size() == 1);
    CHECK(detail::raw_pair_apply(w.mt, north, false, corr).amp.empty());
}

TEST_CASE("fermionic normalization constants", "[fockoracle]") {
    HemiWorld w(8.0);
    Momentum k{0, 0, 1};
    auto entries = mode_pair_lists(w.pd, w.sys, index_sets(w.pd, w.sys, k));
    REQUIRE(entries.size() == 2);
    int64_t c0 = entries[0].count(), c1 = entries[1].count();

    Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(2), e1 = Eigen::VectorXcd::Zero(2);
    e0(0) = 1.0;
    e1(1) = 1.0;

    CHECK(fermionic_Zm(w.mt, entries, {e0}) == 1.0);
    CHECK(fermionic_Zm(w.mt, entries, {e1}) == 1.0);
    CHECK(bosonic_Zm_reference({e0}) == 1.0);

    Eigen::VectorXcd mix(2);
    mix << cd(0.6), cd(0.8);
    CHECK(fermionic_Zm(w.mt, entries, {mix}) == Catch::Approx(1.0).margin(1e-15));

    // orthogonal factors on disjoint patches
    CHECK(fermionic_Zm(w.mt, entries, {e0, e1}) == 1.0);
    CHECK(bosonic_Zm_reference({e0, e1}) == 1.0);

    // repeated factor: Pauli blocking depletes the norm by exactly 2/count
    double z2 = fermionic_Zm(w.mt, entries, {e0, e0});
    CHECK(z2 == 2.0 * double(c0) * (double(c0) - 1.0) / (double(c0) * double(c0)));
    CHECK(bosonic_Zm_reference({e0, e0}) == 2.0);
    double z2b = fermionic_Zm(w.mt, entries, {e1, e1});
    CHECK(z2b == 2.0 * double(c1) * (double(c1) - 1.0) / (double(c1) * double(c1)));

    CHECK_THROWS_AS(fermionic_Zm(w.mt, entries, {e0, e0, e0, e0, e0}), feasibility_error);
    CHECK_THROWS_AS(fermionic_Zm(w.mt, entries, {Eigen::VectorXcd::Zero(2)}), config_error);
}

TEST_CASE("Z difference decreases along the Fermi momentum", "[fockoracle]") {
    Momentum k{0, 0, 1};
    int64_t prev_count = 0;
    double prev_diff = 1e300;
    for (double kf : {5.0, 8.0, 11.0}) {
        HemiWorld w(kf);
        auto entries = mode_pair_lists(w.pd, w.sys, index_sets(w.pd, w.sys, k));
        Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(int(entries.size()));
        e0(0) = 1.0;
        double zf = fermionic_Zm(w.mt, entries, {e0, e0});
        double zb = bosonic_Zm_reference({e0, e0});
        double diff = std::fabs(zf - zb);
        CHECK(diff == Catch::Approx(2.0 / double(entries[0].count())).epsilon(1e-12));
        CHECK(entries[0].count() > prev_count);
        CHECK(diff < prev_diff);
        prev_count = entries[0].count();
        prev_diff = diff;
    }
}

TEST_CASE("brute-force plane-wave energy matches the closed form", "[fockoracle]") {
    auto sys = semiclassical_params(1.0);
    REQUIRE(sys.num_particles == 7);

    PotentialSpec none;
    CHECK(planewave_energy_brute(sys, none) ==
          Catch::Approx(hartree_fock_energy(sys, none)).epsilon(1e-14));
    CHECK(planewave_energy_brute(sys, none) ==
          Catch::Approx(6.0 * sys.kappa * sys.kappa).epsilon(1e-13));

    auto onsite = PotentialSpec::from_entries({{Momentum{0, 0, 0}, 1.0}}, true, nullptr);
    CHECK(planewave_energy_brute(sys, onsite) ==
          Catch::Approx(6.0 * sys.kappa * sys.kappa + 3.0).epsilon(1e-13));

    auto mixed = PotentialSpec::from_entries(
        {{Momentum{0, 0, 0}, 0.4}, {Momentum{0, 0, 1}, 0.7}, {Momentum{1, 0, 0}, 0.25}}, false,
        nullptr);
    CHECK(planewave_energy_brute(sys, mixed) ==
          Catch::Approx(hartree_fock_energy(sys, mixed)).epsilon(1e-12));

    auto sys2 = semiclassical_params(2.0);
    CHECK(planewave_energy_brute(sys2, mixed) ==
          Catch::Approx(hartree_fock_energy(sys2, mixed)).epsilon(1e-12));

    auto sys3 = semiclassical_params(3.0);
    CHECK_THROWS_AS(planewave_energy_brute(sys3, mixed), feasibility_error);
}
