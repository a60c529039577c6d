#pragma once

#include <cmath>
#include <cstdint>

namespace fermibos {

// Compensated accumulator for long sums of similar-magnitude terms.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0, c_ = 0.0;
};

inline constexpr double pi_v = 3.141592653589793238462643383279502884;

} // namespace fermibos
