#pragma once
// Adaptive Gauss-Legendre panels plus the tangent substitution that maps
// [0, inf) integrals onto a finite interval.

#include <cmath>
#include <functional>
#include <vector>

#include "errors.hpp"
#include "util.hpp"

namespace fermibos {

struct QuadratureRule {
    std::vector<double> x; // nodes on (-1, 1)
    std::vector<double> w;
};

// Nodes are roots of the Legendre polynomial, found by Newton iteration from
// the Chebyshev estimate; converges to machine precision in a few steps.
inline const QuadratureRule& gauss_legendre(int n) {
    static thread_local std::vector<QuadratureRule> cache(64);
    QuadratureRule& rule = cache.at(n);
    if (!rule.x.empty()) return rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi_v * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        rule.x[i] = x;
        rule.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

inline double gauss_panel(const std::function<double(double)>& f, double a, double b, int n) {
    const auto& rule = gauss_legendre(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    KahanSum s;
    for (int i = 0; i < n; ++i) s.add(rule.w[i] * f(mid + half * rule.x[i]));
    return half * s.value();
}

struct IntegralResult {
    double value = 0.0;
    double error = 0.0; // accumulated panel error estimates
    int panels = 0;
};

namespace detail {

inline void integrate_rec(const std::function<double(double)>& f, double a, double b,
                          double coarse, double tol, int depth, int order, IntegralResult& out) {
    double mid = 0.5 * (a + b);
    double left = gauss_panel(f, a, mid, order);
    double right = gauss_panel(f, mid, b, order);
    double refined = left + right;
    double err = std::fabs(refined - coarse);
    // Gauss panels of order n converge so fast that the coarse/refined gap is a
    // conservative bound on the refined panel's own error.
    if (err < tol || depth >= 48) {
        if (err >= tol)
            throw quadrature_error("adaptive integration stalled on [" + std::to_string(a) +
                                   ", " + std::to_string(b) + "] with error " + std::to_string(err));
        out.value += refined;
        out.error += err;
        out.panels += 2;
        return;
    }
    integrate_rec(f, a, mid, left, 0.5 * tol, depth + 1, order, out);
    integrate_rec(f, mid, b, right, 0.5 * tol, depth + 1, order, out);
}

} // namespace detail

inline IntegralResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                         double b, double abs_tol, int order = 15) {
    IntegralResult out;
    detail::integrate_rec(f, a, b, gauss_panel(f, a, b, order), abs_tol, 0, order, out);
    return out;
}

// integral over [0, inf) via lambda = tan(theta); the caller's integrand must
// decay at least like 1/lambda^2 so the transformed integrand stays bounded.
inline IntegralResult integrate_semi_infinite(const std::function<double(double)>& f,
                                              double abs_tol, int order = 15) {
    auto g = [&f](double theta) {
        double t = std::tan(theta);
        return f(t) * (1.0 + t * t);
    };
    return integrate_adaptive(g, 0.0, 0.5 * pi_v, abs_tol, order);
}

} // namespace fermibos
