#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fermibos/bogoliubov.hpp"

using namespace fermibos;

namespace {

// synthetic antipodally structured mode matrices from a half-spectrum d and a
// rank-one coupling g |v><v|
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

ModeMatrices random_synth(uint64_t seed, int h) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(0.1, 1.0);
    Eigen::VectorXd d(h), v(h);
    for (int i = 0; i < h; ++i) d(i) = ud(rng);
    for (int i = 0; i < h; ++i) v(i) = ud(rng);
    return make_synth(d, 0.25 * ud(rng), v);
}

ModeMatrices lattice_instance() {
    auto sys = semiclassical_params(15.0);
    auto pd = build_patch_decomposition(sys, 16, 2.0 / 45.0, 2.0);
    auto ms = index_sets(pd, sys, Momentum{0, 0, 1});
    return assemble_mode_matrices(sys, pd, ms, 1.0);
}

} // namespace

TEST_CASE("symmetric matrix functions compose correctly", "[bogoliubov]") {
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd raw(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) raw(i, j) = nd(rng);
    Eigen::MatrixXd a = symmetrize(raw * raw.transpose()) + Eigen::MatrixXd::Identity(6, 6);
    Eigen::MatrixXd r = sym_sqrt(a);
    CHECK((r * r - a).norm() < 1e-12 * a.norm());
    CHECK((sym_exp(sym_log(a)) - a).norm() < 1e-12 * a.norm());
    Eigen::MatrixXd is = sym_invsqrt(a);
    CHECK((is * a * is - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-12);
    // cosh^2 - sinh^2 = 1
    Eigen::MatrixXd k = 0.3 * symmetrize(raw);
    Eigen::MatrixXd c = sym_cosh(k), s = sym_sinh(k);
    CHECK((c * c - s * s - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-12);
}

TEST_CASE("positivity domain is enforced", "[bogoliubov]") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
    a(2, 2) = -0.5;
    CHECK_THROWS_AS(sym_sqrt(a), singularity_error);
    CHECK_THROWS_AS(sym_log(a), singularity_error);
    CHECK_THROWS_AS(sym_invsqrt(a), singularity_error);
}

TEST_CASE("route A identities on synthetic instances", "[bogoliubov]") {
    for (uint64_t seed : {11u, 12u, 13u, 14u}) {
        auto mm = random_synth(seed, 3);
        auto bd = diagonalize_mode(mm);
        int n = mm.dim;
        Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
        CHECK((sym_exp(2.0 * bd.K) - bd.S1 * bd.S1.transpose()).norm() < 1e-10);
        CHECK((bd.S1.transpose() * bd.S2 - id).norm() < 1e-11);
        CHECK((bd.O.transpose() * bd.O - id).norm() < 1e-12);
        // spectra of curlyK and E agree
        auto se_k = sym_eig(bd.curlyK).eval;
        auto se_e = sym_eig(bd.E).eval;
        CHECK((se_k - se_e).cwiseAbs().maxCoeff() < 1e-10);
        // E positive
        CHECK(se_e(0) > 0.0);
    }
}

TEST_CASE("interaction off gives the trivial transform", "[bogoliubov]") {
    Eigen::VectorXd d(3);
    d << 0.4, 0.7, 1.0;
    auto mm = make_synth(d, 0.0, Eigen::VectorXd::Ones(3));
    auto bd = diagonalize_mode(mm);
    CHECK((bd.S1 - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-12);
    CHECK(bd.K.norm() < 1e-12);
    CHECK((bd.curlyK - mm.D).norm() < 1e-12);
    CHECK(bd.ground_constant == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("hyperbolic route agrees with the spectral route", "[bogoliubov]") {
    for (uint64_t seed : {21u, 22u}) {
        auto mm = random_synth(seed, 4);
        auto bd = diagonalize_mode(mm);
        Eigen::MatrixXd kb = curlyK_hyperbolic(mm, bd);
        CHECK((kb - bd.curlyK).norm() < 1e-9);
        auto hs = hyperbolic_split(bd);
        CHECK((hs.cosh_k - sym_cosh(bd.K)).norm() < 1e-10);
        CHECK((hs.sinh_k - sym_sinh(bd.K)).norm() < 1e-10);
    }
}

TEST_CASE("block route agrees and has the signed L structure", "[bogoliubov]") {
    for (uint64_t seed : {31u, 32u}) {
        auto mm = random_synth(seed, 4);
        auto bd = diagonalize_mode(mm);
        auto br = block_route_K(mm);
        CHECK((br.K - bd.K).norm() < 1e-9);
        auto l1 = sym_eig(br.L1).eval;
        auto l2 = sym_eig(br.L2).eval;
        CHECK(l1(l1.size() - 1) <= 1e-12);
        CHECK(l2(0) >= -1e-12);
    }
}

TEST_CASE("quadratic form is diagonalized with the right constant", "[bogoliubov]") {
    for (uint64_t seed : {41u, 42u}) {
        auto mm = random_synth(seed, 3);
        auto bd = diagonalize_mode(mm);
        auto qc = quadratic_form_check(mm, bd);
        CHECK(qc.offdiag < 1e-9);
        CHECK(qc.diag < 1e-9);
        CHECK(qc.constant < 1e-9);
    }
}

TEST_CASE("lattice mode: routes, bounds, and sign of the constant", "[bogoliubov]") {
    auto mm = lattice_instance();
    auto bd = diagonalize_mode(mm);
    auto br = block_route_K(mm);
    CHECK((br.K - bd.K).norm() < 1e-9);
    Eigen::MatrixXd kb = curlyK_hyperbolic(mm, bd);
    CHECK((kb - bd.curlyK).norm() < 1e-9);
    auto qc = quadratic_form_check(mm, bd);
    CHECK(qc.offdiag < 1e-9);
    CHECK(qc.diag < 1e-9);
    CHECK(bd.ground_constant <= 1e-12);
    // kernel bounds
    double m = 16.0;
    CHECK(bd.K.cwiseAbs().maxCoeff() * m / mm.vk <= 20.0);
    CHECK(bd.K.norm() <= 10.0);
}

TEST_CASE("scalar mode reproduces the closed form", "[bogoliubov]") {
    // dim 2, scalar d and coupling g. In the antipodal +/- basis the
    // symmetric/antisymmetric combinations carry d+2g and d with the roles of
    // J and P swapped, so E^2 = d(d+2g) on both and
    //   E = sqrt(d(d+2g)) I,   ground = sqrt(d(d+2g)) - d - g.
    Eigen::VectorXd d(1), v(1);
    d << 0.8;
    v << 1.0;
    double g = 0.1;
    auto mm = make_synth(d, g, v);
    auto bd = diagonalize_mode(mm);
    auto ev = sym_eig(bd.E).eval;
    double e = std::sqrt(0.8 * (0.8 + 2.0 * g));
    CHECK(ev(0) == Catch::Approx(e).epsilon(1e-12));
    CHECK(ev(1) == Catch::Approx(e).epsilon(1e-12));
    CHECK(bd.ground_constant == Catch::Approx(e - 0.8 - g).epsilon(1e-12));
}
