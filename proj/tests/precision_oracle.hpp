#pragma once

// Arbitrary-precision references for the special functions, computed from
// textbook series in 50-digit decimal arithmetic.

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace testsupport::oracle {

using Big = boost::multiprecision::cpp_dec_float_50;

inline Big big_pi() { return boost::math::constants::pi<Big>(); }

// erf(z) = 2/sqrt(pi) * sum_n (-1)^n z^(2n+1) / (n! (2n+1)).
inline Big erf_series(const Big &z) {
    Big term = z; // (-1)^n z^(2n+1) / n!
    Big sum = 0;
    const Big z2 = z * z;
    const Big eps("1e-45");
    for (int n = 0; n < 2000; ++n) {
        const Big contrib = term / (2 * n + 1);
        sum += contrib;
        if (abs(contrib) < eps) {
            break;
        }
        term *= -z2 / (n + 1);
    }
    return 2 * sum / sqrt(big_pi());
}

// Q(1/2, x) = erfc(sqrt(x)).
inline double gamma_q_half(double x) {
    const Big z = sqrt(Big(x));
    return static_cast<double>(Big(1) - erf_series(z));
}

// Student-t upper tails with closed forms: dof 1 is Cauchy, dof 2 algebraic.
inline double t_sf_dof1(double t) {
    return static_cast<double>(Big("0.5") - atan(Big(t)) / big_pi());
}
inline double t_sf_dof2(double t) {
    const Big bt(t);
    return static_cast<double>(Big("0.5") - bt / (2 * sqrt(2 + bt * bt)));
}

// Q(1, x) = exp(-x); Q(n, x) = exp(-x) sum_{k<n} x^k / k! for integer n.
inline double gamma_q_integer(int n, double x) {
    const Big bx(x);
    Big term = 1;
    Big sum = 0;
    for (int k = 0; k < n; ++k) {
        sum += term;
        term *= bx / (k + 1);
    }
    return static_cast<double>(exp(-bx) * sum);
}

} // namespace testsupport::oracle
