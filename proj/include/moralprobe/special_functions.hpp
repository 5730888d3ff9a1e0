#pragma once

namespace moralprobe::stats {

// Regularized lower incomplete gamma P(a, x). a > 0, x >= 0.
double gamma_p(double a, double x);

// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x). a > 0, x >= 0.
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b). a, b > 0, 0 <= x <= 1.
double incomplete_beta(double a, double b, double x);

// Survival function P(T > t) of Student's t with `dof` degrees of freedom.
double t_sf(double t, int dof);

// Upper tail P(X > x) of the chi-squared distribution.
double chi_square_sf(double x, int dof);

} // namespace moralprobe::stats
