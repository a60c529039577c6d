#pragma once
// Matrix functions of real symmetric matrices through a cached spectral
// decomposition.  All matrix functions in the Bogoliubov pipeline go through
// here; nothing uses Newton-type iterations.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <string>

#include "errors.hpp"

namespace fermibos {

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& a) {
    return 0.5 * (a + a.transpose());
}

struct SymEig {
    Eigen::VectorXd eval; // ascending
    Eigen::MatrixXd evec;

    Eigen::MatrixXd apply(const std::function<double(double)>& f) const {
        Eigen::VectorXd fe(eval.size());
        for (Eigen::Index i = 0; i < eval.size(); ++i) fe(i) = f(eval(i));
        return evec * fe.asDiagonal() * evec.transpose();
    }
};

inline SymEig sym_eig(const Eigen::MatrixXd& a, const std::string& label = "matrix") {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    if (es.info() != Eigen::Success)
        throw singularity_error("eigendecomposition failed for " + label);
    SymEig se{es.eigenvalues(), es.eigenvectors()};
    double scale = std::max(1.0, a.norm());
    double res = (se.evec * se.eval.asDiagonal() * se.evec.transpose() - a).norm();
    if (res > 1e-11 * scale)
        throw singularity_error("eigendecomposition residual " + std::to_string(res) + " for " + label);
    return se;
}

// domain guard for sqrt/log/inverse-sqrt: smallest eigenvalue must clear a
// relative positivity threshold
inline void require_pd(const SymEig& se, const std::string& label) {
    double lmax = std::max(std::fabs(se.eval(0)), std::fabs(se.eval(se.eval.size() - 1)));
    if (se.eval(0) <= 1e-12 * std::max(1.0, lmax))
        throw singularity_error(label + " not positive definite: min eigenvalue " +
                                std::to_string(se.eval(0)));
}

inline Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& a, const std::string& label = "matrix") {
    SymEig se = sym_eig(a, label);
    require_pd(se, label);
    return se.apply([](double x) { return std::sqrt(x); });
}

inline Eigen::MatrixXd sym_invsqrt(const Eigen::MatrixXd& a, const std::string& label = "matrix") {
    SymEig se = sym_eig(a, label);
    require_pd(se, label);
    return se.apply([](double x) { return 1.0 / std::sqrt(x); });
}

inline Eigen::MatrixXd sym_log(const Eigen::MatrixXd& a, const std::string& label = "matrix") {
    SymEig se = sym_eig(a, label);
    require_pd(se, label);
    return se.apply([](double x) { return std::log(x); });
}

inline Eigen::MatrixXd sym_exp(const Eigen::MatrixXd& a) {
    return sym_eig(a, "exp argument").apply([](double x) { return std::exp(x); });
}

inline Eigen::MatrixXd sym_cosh(const Eigen::MatrixXd& a) {
    return sym_eig(a, "cosh argument").apply([](double x) { return std::cosh(x); });
}

inline Eigen::MatrixXd sym_sinh(const Eigen::MatrixXd& a) {
    return sym_eig(a, "sinh argument").apply([](double x) { return std::sinh(x); });
}

} // namespace fermibos
