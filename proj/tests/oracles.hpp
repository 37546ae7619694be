#pragma once

// Reference computations kept independent of the library code paths.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

/// Romberg extrapolation in long double. Stops when successive diagonal
/// entries agree to `rel_tol`.
inline long double romberg(const std::function<long double(long double)>& f, long double a, long double b,
                           long double rel_tol = 1e-15L, int max_levels = 22) {
    std::vector<long double> prev(1), cur;
    long double h = b - a;
    prev[0] = h * (f(a) + f(b)) / 2;
    for (int k = 1; k < max_levels; ++k) {
        h /= 2;
        long double mid = 0;
        const long n = 1L << (k - 1);
        for (long i = 0; i < n; ++i) {
            mid += f(a + (2 * i + 1) * h);
        }
        cur.assign(static_cast<std::size_t>(k) + 1, 0);
        cur[0] = prev[0] / 2 + h * mid;
        long double factor = 1;
        for (int j = 1; j <= k; ++j) {
            factor *= 4;
            cur[j] = cur[j - 1] + (cur[j - 1] - prev[j - 1]) / (factor - 1);
        }
        if (k > 4 && std::fabs(cur[k] - prev[k - 1]) <= rel_tol * std::fabs(cur[k])) {
            return cur[k];
        }
        prev.swap(cur);
    }
    return prev.back();
}

inline constexpr long double kEulerGamma = 0.577215664901532860606512090082402431L;

/// Ei(x) = gamma + ln x + integral_0^x (e^t - 1) / t dt, x > 0.
inline long double ei(long double x) {
    auto g = [](long double t) { return t == 0 ? 1.0L : std::expm1(t) / t; };
    return kEulerGamma + std::log(x) + romberg(g, 0, x, 1e-18L, 26);
}

/// Window sustainability by direct integration of the ratio of the two Poisson terms.
inline long double window_sustainability(double alpha, double beta, int N, int E, int hop_inverse, int Q,
                                         double t1, double t2) {
    auto ratio = [&](long double t) {
        const long double a = alpha / t;
        const long double b = beta / t;
        return (std::exp(-a) * a * a / 2) / (std::exp(-b) * b);
    };
    const long double P = std::pow(1.0L - static_cast<long double>(hop_inverse) / E, N);
    return romberg(ratio, t1, t2) / (N * P * Q);
}

inline std::uint64_t factorial(int n) {
    std::uint64_t f = 1;
    for (int k = 2; k <= n; ++k) {
        f *= static_cast<std::uint64_t>(k);
    }
    return f;
}

}  // namespace oracle
