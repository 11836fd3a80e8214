// bessel.hpp -- Bessel functions of the first kind for integer order, and their zeros.
//
// J_n(x) is evaluated by the ascending series for small |x|, by Miller's
// backward recurrence (normalized with J_0 + 2 sum J_2k = 1) for moderate |x|,
// and by the Hankel asymptotic expansion for very large |x|.

#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "qsync/error.hpp"

namespace qsync {

namespace detail {

inline double bessel_series(int n, double x) {
    // sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!)
    const double half = 0.5 * x;
    double term = 1.0;
    for (int i = 1; i <= n; ++i) term *= half / i;
    double sum = term;
    const double q = -half * half;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<double>(k) * (k + n));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

inline double bessel_miller(int n, double x) {
    // x > 0 here.
    const double top = std::max(static_cast<double>(n), x);
    int m = static_cast<int>(top + 20.0 + std::sqrt(160.0 * top));
    m += m % 2;

    constexpr double big = 1e250;
    constexpr double small = 1e-250;
    const double two_over_x = 2.0 / x;

    double next = 0.0;  // J_{k+1}
    double cur = 1e-30; // J_k, starting at k = m
    double norm = 0.0;  // J_0 + 2 sum J_{2k}, accumulated for k >= 1 here
    double result = (m == n) ? cur : 0.0;
    for (int k = m; k > 0; --k) {
        const double prev = k * two_over_x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        if (std::abs(cur) > big) {
            cur *= small;
            next *= small;
            norm *= small;
            result *= small;
        }
        const int order = k - 1;
        if (order == n) result = cur;
        if (order > 0 && order % 2 == 0) norm += 2.0 * cur;
    }
    norm += cur;
    return result / norm;
}

inline double bessel_hankel(int n, double x) {
    // J_n(x) ~ sqrt(2/(pi x)) [P cos(chi) - Q sin(chi)]
    const double mu = 4.0 * n * n;
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double last = 1.0;
    const double eightx = 8.0 * x;
    for (int k = 1; k < 40; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double candidate = term * (mu - odd * odd) / (k * eightx);
        if (std::abs(candidate) > last) break; // asymptotic series starts diverging
        term = candidate;
        last = std::abs(term);
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 1) {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if (last < 1e-17) break;
    }
    const double chi = x - (0.5 * n + 0.25) * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace detail

/// J_n(x) for integer n >= 0 and finite real x.
///
/// Absolute error is below 1e-12 for |x| <= 50; the Hankel branch beyond
/// |x| = 2.5e4 is accurate to roughly 1e-12 relative to the sqrt(2/(pi x)) scale.
inline double bessel_jn(int n, double x) {
    if (n < 0) throw InvalidInput("bessel_jn: order must be non-negative");
    if (!std::isfinite(x)) throw InvalidInput("bessel_jn: argument must be finite");

    const double sign = (x < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
    const double ax = std::abs(x);
    if (ax == 0.0) return n == 0 ? 1.0 : 0.0;

    double value = 0.0;
    if (ax <= 2.0) {
        value = detail::bessel_series(n, ax);
    } else if (ax > 2.5e4 && static_cast<double>(n) * n < 0.01 * ax) {
        value = detail::bessel_hankel(n, ax);
    } else {
        value = detail::bessel_miller(n, ax);
    }
    return sign * value;
}

/// Ascending list of positive zeros of J_n.
struct BesselZeroTable {
    int order = 0;
    std::vector<double> zeros;
};

namespace detail {

// Bisects a bracketed sign change of J_n down to adjacent doubles.
inline double refine_zero(int n, double lo, double hi, double f_lo) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = bessel_jn(n, mid);
        if (f_mid == 0.0) return mid;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

} // namespace detail

/// First `count` positive zeros of J_n.
///
/// Zeros are bracketed by a sign-change scan (step 0.5, below the minimum
/// zero spacing of about 2.9) starting at x = n, below which J_n has no
/// positive zeros, then bisected to double precision.
inline BesselZeroTable bessel_zero_table(int n, int count) {
    if (n < 0) throw InvalidInput("bessel_zero_table: order must be non-negative");
    if (count < 1) throw InvalidInput("bessel_zero_table: count must be at least 1");

    BesselZeroTable table;
    table.order = n;
    table.zeros.reserve(static_cast<std::size_t>(count));

    constexpr double step = 0.5;
    double lo = static_cast<double>(n);
    double f_lo = bessel_jn(n, lo);
    while (static_cast<int>(table.zeros.size()) < count) {
        const double hi = lo + step;
        const double f_hi = bessel_jn(n, hi);
        if (f_hi == 0.0) {
            table.zeros.push_back(hi);
            lo = hi + 1e-9;
            f_lo = bessel_jn(n, lo);
            continue;
        }
        if ((f_lo > 0.0) != (f_hi > 0.0)) {
            table.zeros.push_back(detail::refine_zero(n, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
    }
    return table;
}

/// k-th positive zero (k >= 1) of J_n.
inline double jn_zero(int n, int k) {
    if (k < 1) throw InvalidInput("jn_zero: zero index must be at least 1");
    return bessel_zero_table(n, k).zeros.back();
}

} // namespace qsync
