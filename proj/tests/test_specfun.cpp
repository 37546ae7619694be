#include <doctest.h>

#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "v2xsec/error.hpp"
#include "v2xsec/specfun.hpp"

using namespace v2xsec;
using specfun::expint_ei;
using specfun::integrate;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("Ei reference values") {
    CHECK(rel(expint_ei(0.2), -0.8217605879024003) < 1e-14);
    CHECK(rel(expint_ei(1.0 / 105.0), -4.067198151918413) < 1e-14);
    CHECK(rel(expint_ei(0.009), -4.124294746175943) < 1e-14);
    CHECK(rel(expint_ei(30.0), 368973209407.2742) < 1e-14);
    CHECK(rel(expint_ei(40.0), 6039718263611241.578) < 1e-13);
}

TEST_CASE("Ei against the quadrature oracle") {
    for (int i = 0; i < 40; ++i) {
        const double x = 0.009 + (30.0 - 0.009) * i / 39.0;
        const double ref = static_cast<double>(oracle::ei(x));
        INFO("x = " << x);
        CHECK(rel(expint_ei(x), ref) < 1e-11);
    }
}

TEST_CASE("Ei against Boost across the series/asymptotic switch") {
    for (double x : {0.5, 5.0, 39.0, 39.999, 40.0, 40.001, 41.0, 60.0, 150.0, 700.0}) {
        INFO("x = " << x);
        CHECK(rel(expint_ei(x), boost::math::expint(x)) < 1e-13);
    }
}

TEST_CASE("Ei domain and overflow") {
    CHECK_THROWS_AS(expint_ei(0.0), DomainError);
    CHECK_THROWS_AS(expint_ei(-1.0), DomainError);
    CHECK_THROWS_AS(expint_ei(std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(expint_ei(1e-5, 1e-4), DomainError);
    CHECK_NOTHROW(expint_ei(1e-3, 1e-4));
    CHECK_THROWS_AS(expint_ei(800.0), OverflowError);
}

TEST_CASE("Ei is strictly increasing on (0, 60]") {
    double previous = expint_ei(1e-6);
    for (double x = 1e-3; x <= 60.0; x *= 1.01) {
        const double v = expint_ei(x);
        REQUIRE(v > previous);
        previous = v;
    }
}

TEST_CASE("ln_gamma") {
    for (int n = 1; n <= 15; ++n) {
        const auto f = oracle::factorial(n - 1);
        INFO("n = " << n);
        CHECK(specfun::ln_gamma(n) == std::log(static_cast<double>(f)));
        CHECK(static_cast<std::uint64_t>(std::llround(std::exp(specfun::ln_gamma(n)))) == f);
    }
    CHECK(rel(specfun::ln_gamma(0.5), 0.5 * std::log(std::acos(-1.0))) < 1e-15);
    CHECK(rel(specfun::ln_gamma(100.5), std::lgamma(100.5)) < 1e-15);
    CHECK_THROWS_AS(specfun::ln_gamma(0.0), DomainError);
    CHECK_THROWS_AS(specfun::ln_gamma(-2.5), DomainError);
}

TEST_CASE("beta_pdf") {
    CHECK(specfun::beta_pdf(0.3, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(specfun::beta_pdf(0.25, 2.0, 3.0) == doctest::Approx(12.0 * 0.25 * 0.75 * 0.75).epsilon(1e-14));
    const auto total = integrate([](double x) { return specfun::beta_pdf(x, 2.5, 4.0); }, {1e-12, 1 - 1e-12});
    CHECK(total.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(specfun::beta_pdf(0.0, 1, 1), DomainError);
    CHECK_THROWS_AS(specfun::beta_pdf(1.0, 1, 1), DomainError);
    CHECK_THROWS_AS(specfun::beta_pdf(0.5, 0.0, 1), DomainError);
    CHECK_THROWS_AS(specfun::beta_pdf(0.5, 1, -1), DomainError);
}

TEST_CASE("integrate: exact results and error estimates") {
    const auto r = integrate([](double x) { return std::sin(x); }, {0.0, std::acos(-1.0), 1e-12});
    CHECK(rel(r.value, 2.0) < 1e-12);
    CHECK(r.error_estimate >= 0.0);
    CHECK(r.evaluations >= 15);

    const auto poly = integrate([](double x) { return x * x * x; }, {0.0, 2.0});
    CHECK(rel(poly.value, 4.0) < 1e-14);

    const auto empty = integrate([](double) { return 1.0; }, {3.0, 3.0});
    CHECK(empty.value == 0.0);

    const auto peaked = integrate([](double x) { return 1.0 / std::sqrt(x); }, {1e-14, 1.0, 1e-9});
    CHECK(rel(peaked.value, 2.0 - 2e-7) < 1e-8);
}

TEST_CASE("integrate: failures") {
    CHECK_THROWS_AS(integrate([](double x) { return x; }, {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(integrate([](double) { return std::numeric_limits<double>::quiet_NaN(); }, {0.0, 1.0}),
                    NonFiniteError);
    try {
        integrate([](double x) { return std::sin(1.0 / x); }, {1e-8, 1.0, 1e-14, 6});
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(std::isfinite(e.best_estimate()));
    }
}

TEST_CASE("integrate is linear in the integrand") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    auto f = [](double x) { return std::exp(-x) * std::cos(3 * x); };
    auto g = [](double x) { return x / (1 + x * x); };
    for (int trial = 0; trial < 20; ++trial) {
        const double a = coef(rng);
        const double b = coef(rng);
        const specfun::QuadSpec spec{0.0, 4.0, 1e-13};
        const double lhs = integrate([&](double x) { return a * f(x) + b * g(x); }, spec).value;
        const double rhs = a * integrate(f, spec).value + b * integrate(g, spec).value;
        CHECK(std::abs(lhs - rhs) < 1e-12 * (std::abs(a) + std::abs(b)));
    }
}
