#pragma once

#include <functional>

namespace v2xsec::specfun {

/// Bounds and accuracy target for `integrate`.
///
/// `lower == upper` is accepted and integrates to zero; every other
/// configuration needs `upper > lower`.
struct QuadSpec {
    double lower = 0.0;
    double upper = 1.0;
    double rel_tol = 1e-10;
    int max_depth = 60;

    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
};

/// Smallest argument `expint_ei` accepts before reporting the log singularity.
inline constexpr double kEiDefaultFloor = 1e-300;

/// Above this argument Ei switches from its power series to the asymptotic expansion.
inline constexpr double kEiSeriesLimit = 40.0;

/// Exponential integral Ei(x) for x > 0.
///
/// Throws DomainError for x <= 0 or x < `floor`, OverflowError when the
/// result exceeds the double range (x beyond about 716).
double expint_ei(double x, double floor = kEiDefaultFloor);

/// ln Gamma(x) for x > 0. Integer arguments up to 23 go through an exact
/// factorial table.
double ln_gamma(double x);

/// Beta(shape, scale) density at x in the open interval (0, 1).
double beta_pdf(double x, double shape, double scale);

/// Globally adaptive Gauss-Kronrod (7/15) quadrature with interval bisection.
///
/// Throws ConvergenceError (carrying the best estimate) when an interval
/// would need to be split past `spec.max_depth`, and NonFiniteError when
/// `f` returns NaN or infinity.
QuadResult integrate(const std::function<double(double)>& f, const QuadSpec& spec);

}  // namespace v2xsec::specfun
