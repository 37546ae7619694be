#include "v2xsec/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include "v2xsec/error.hpp"

namespace v2xsec::specfun {

namespace {

// Abscissae and weights of the 15-point Kronrod rule and its embedded
// 7-point Gauss rule (QUADPACK qk15).
constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
};
// Gauss weights for kKronrodNodes[1], [3], [5], [7].
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
};

struct Segment {
    double lower;
    double upper;
    double value;
    double error;
    double abs_value;
    int depth;

    bool operator<(const Segment& other) const { return error < other.error; }
};

double checked_eval(const std::function<double(double)>& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y)) {
        std::ostringstream msg;
        msg << "integrand returned " << y << " at x = " << x;
        throw NonFiniteError(msg.str());
    }
    return y;
}

Segment kronrod15(const std::function<double(double)>& f, double lower, double upper, int depth) {
    const double center = 0.5 * (lower + upper);
    const double half = 0.5 * (upper - lower);

    const double f_center = checked_eval(f, center);
    double kronrod = f_center * kKronrodWeights[7];
    double gauss = f_center * kGaussWeights[3];
    double abs_sum = std::abs(kronrod);

    for (std::size_t i = 0; i < 7; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double f1 = checked_eval(f, center - dx);
        const double f2 = checked_eval(f, center + dx);
        kronrod += kKronrodWeights[i] * (f1 + f2);
        abs_sum += kKronrodWeights[i] * (std::abs(f1) + std::abs(f2));
        if (i % 2 == 1) {
            gauss += kGaussWeights[i / 2] * (f1 + f2);
        }
    }

    return Segment{lower, upper, kronrod * half, std::abs((kronrod - gauss) * half),
                   abs_sum * std::abs(half), depth};
}

// Ei(x) = gamma + ln x + sum_{k>=1} x^k / (k k!)
double ei_series(double x) {
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 500; ++k) {
        term *= x / k;
        const double contribution = term / k;
        sum += contribution;
        if (contribution < std::numeric_limits<double>::epsilon() * 0.25 * std::abs(sum)) {
            break;
        }
    }
    return std::numbers::egamma + std::log(x) + sum;
}

// Ei(x) ~ e^x / x * sum_k k! / x^k, truncated at the smallest term.
double ei_asymptotic(double x) {
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double next = term * k / x;
        if (next >= term || next < std::numeric_limits<double>::epsilon() * 0.25) {
            break;
        }
        term = next;
        sum += term;
    }
    // Split e^x so the product only overflows when the true value does.
    const double half = std::exp(0.5 * x);
    return half * (half / x) * sum;
}

constexpr int kFactorialTableSize = 23;

constexpr std::array<double, kFactorialTableSize> make_factorials() {
    std::array<double, kFactorialTableSize> table{};
    table[0] = 1.0;
    for (int i = 1; i < kFactorialTableSize; ++i) {
        table[i] = table[i - 1] * i;
    }
    return table;
}

constexpr auto kFactorials = make_factorials();

}  // namespace

void QuadSpec::validate() const {
    if (!std::isfinite(lower) || !std::isfinite(upper)) {
        throw DomainError("quadrature bounds must be finite");
    }
    if (upper < lower) {
        throw DomainError("quadrature bounds reversed: upper < lower");
    }
    if (!(rel_tol > 0.0 && rel_tol < 1.0)) {
        throw DomainError("rel_tol must lie in (0, 1)");
    }
    if (max_depth < 1) {
        throw DomainError("max_depth must be at least 1");
    }
}

double expint_ei(double x, double floor) {
    if (std::isnan(x) || x <= 0.0) {
        throw DomainError("expint_ei requires x > 0");
    }
    if (x < floor) {
        throw DomainError("expint_ei argument below the configured floor; Ei diverges to -inf as x -> 0+");
    }
    const double value = x <= kEiSeriesLimit ? ei_series(x) : ei_asymptotic(x);
    if (!std::isfinite(value)) {
        throw OverflowError("expint_ei result exceeds the double range");
    }
    return value;
}

double ln_gamma(double x) {
    if (std::isnan(x) || x <= 0.0) {
        throw DomainError("ln_gamma requires x > 0");
    }
    if (x <= kFactorialTableSize && x == std::floor(x)) {
        return std::log(kFactorials[static_cast<std::size_t>(x) - 1]);
    }
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

double beta_pdf(double x, double shape, double scale) {
    if (!(x > 0.0 && x < 1.0)) {
        throw DomainError("beta_pdf requires 0 < x < 1");
    }
    if (!(shape > 0.0) || !(scale > 0.0)) {
        throw DomainError("beta_pdf requires positive shape and scale");
    }
    const double log_norm = ln_gamma(shape + scale) - ln_gamma(shape) - ln_gamma(scale);
    return std::exp(log_norm + (shape - 1.0) * std::log(x) + (scale - 1.0) * std::log1p(-x));
}

QuadResult integrate(const std::function<double(double)>& f, const QuadSpec& spec) {
    spec.validate();
    if (spec.lower == spec.upper) {
        return {};
    }

    std::priority_queue<Segment> pending;
    Segment first = kronrod15(f, spec.lower, spec.upper, 0);
    int evaluations = 15;
    double total = first.value;
    double total_error = first.error;
    double total_abs = first.abs_value;
    pending.push(first);

    auto tolerance = [&] {
        return std::max(spec.rel_tol * std::abs(total),
                        50.0 * std::numeric_limits<double>::epsilon() * total_abs);
    };

    while (total_error > tolerance()) {
        Segment worst = pending.top();
        if (worst.depth + 1 > spec.max_depth) {
            std::ostringstream msg;
            msg << "quadrature did not converge within max_depth " << spec.max_depth
                << " (estimate " << total << ", error " << total_error << ")";
            throw ConvergenceError(msg.str(), total, total_error);
        }
        pending.pop();

        const double mid = 0.5 * (worst.lower + worst.upper);
        const Segment left = kronrod15(f, worst.lower, mid, worst.depth + 1);
        const Segment right = kronrod15(f, mid, worst.upper, worst.depth + 1);
        evaluations += 30;

        total += left.value + right.value - worst.value;
        total_error += left.error + right.error - worst.error;
        total_abs += left.abs_value + right.abs_value - worst.abs_value;
        pending.push(left);
        pending.push(right);
    }

    // Re-sum to shed the rounding drift of the running updates.
    double value = 0.0;
    double error = 0.0;
    while (!pending.empty()) {
        value += pending.top().value;
        error += pending.top().error;
        pending.pop();
    }
    return {value, error, evaluations};
}

}  // namespace v2xsec::specfun
