#pragma once
// Matrix permanent for the small Gram matrices of excitation families.
// Direct expansion for tiny orders, Ryser's inclusion-exclusion with Gray-code
// subset updates above that.  Both are exact-arithmetic algorithms; cost grows
// like n! and n 2^n respectively, so the order is capped.

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <complex>
#include <numeric>
#include <vector>

#include "errors.hpp"

namespace fermibos {

inline constexpr int permanent_max_order = 12;

namespace detail {

inline std::complex<double> perm_direct(const Eigen::MatrixXcd& a) {
    int n = int(a.rows());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::complex<double> sum = 0.0;
    do {
        std::complex<double> prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= a(i, idx[i]);
        sum += prod;
    } while (std::next_permutation(idx.begin(), idx.end()));
    return sum;
}

inline std::complex<double> perm_ryser(const Eigen::MatrixXcd& a) {
    int n = int(a.rows());
    std::vector<std::complex<double>> rowsum(n, 0.0);
    std::complex<double> total = 0.0;
    uint32_t prev_gray = 0;
    for (uint32_t s = 1; s < (uint32_t(1) << n); ++s) {
        uint32_t gray = s ^ (s >> 1);
        uint32_t changed = gray ^ prev_gray;
        int col = std::countr_zero(changed);
        double sign_col = (gray & changed) ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i) rowsum[i] += sign_col * a(i, col);
        prev_gray = gray;
        std::complex<double> prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= rowsum[i];
        total += (std::popcount(gray) % 2 ? -1.0 : 1.0) * prod;
    }
    return (n % 2 ? -1.0 : 1.0) * total;
}

} // namespace detail

inline std::complex<double> permanent(const Eigen::MatrixXcd& a) {
    if (a.rows() != a.cols()) throw config_error("permanent needs a square matrix");
    int n = int(a.rows());
    if (n == 0) return 1.0;
    if (n > permanent_max_order)
        throw feasibility_error("permanent order " + std::to_string(n) + " exceeds cap " +
                                std::to_string(permanent_max_order));
    return n < 6 ? detail::perm_direct(a) : detail::perm_ryser(a);
}

} // namespace fermibos
