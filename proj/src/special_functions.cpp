#include "moralprobe/special_functions.hpp"

#include "moralprobe/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace moralprobe::stats {

namespace {

constexpr int max_iterations = 10'000;
constexpr double epsilon = 1e-16;
constexpr double tiny = 1e-300;

// Series for P(a, x); converges quickly for x < a + 1.
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < max_iterations; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * epsilon) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw NumericError("gamma_p: series failed to converge");
}

// Modified Lentz continued fraction for Q(a, x); used for x >= a + 1.
double gamma_q_fraction(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < max_iterations; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < epsilon) {
            return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
        }
    }
    throw NumericError("gamma_q: continued fraction failed to converge");
}

void check_gamma_domain(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a) || std::isnan(x)) {
        throw NumericError("incomplete gamma: need a > 0 and x >= 0");
    }
}

// Continued fraction for the incomplete beta function (Lentz).
double beta_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) {
        d = tiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m < max_iterations; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < epsilon) {
            return h;
        }
    }
    throw NumericError("incomplete_beta: continued fraction failed to converge");
}

} // namespace

double gamma_p(double a, double x) {
    check_gamma_domain(a, x);
    if (x == 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    return x < a + 1.0 ? gamma_p_series(a, x) : 1.0 - gamma_q_fraction(a, x);
}

double gamma_q(double a, double x) {
    check_gamma_domain(a, x);
    if (x == 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    return x < a + 1.0 ? 1.0 - gamma_p_series(a, x) : gamma_q_fraction(a, x);
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        throw NumericError("incomplete_beta: need a, b > 0 and 0 <= x <= 1");
    }
    if (x == 0.0 || x == 1.0) {
        return x;
    }
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_fraction(b, a, 1.0 - x) / b;
}

double t_sf(double t, int dof) {
    if (dof < 1 || std::isnan(t)) {
        throw NumericError("t_sf: need dof >= 1 and a number, got dof " + std::to_string(dof));
    }
    if (std::isinf(t)) {
        return t > 0 ? 0.0 : 1.0;
    }
    const double v = dof;
    const double tail = 0.5 * incomplete_beta(0.5 * v, 0.5, v / (v + t * t));
    return t >= 0.0 ? tail : 1.0 - tail;
}

double chi_square_sf(double x, int dof) {
    if (dof < 1 || !(x >= 0.0)) {
        throw NumericError("chi_square_sf: need dof >= 1 and x >= 0");
    }
    return gamma_q(0.5 * dof, 0.5 * x);
}

} // namespace moralprobe::stats
