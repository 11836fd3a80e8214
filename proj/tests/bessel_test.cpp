#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "qsync/bessel.hpp"
#include "qsync/dynamics.hpp"

using qsync::bessel_jn;
using qsync::jn_zero;

namespace {

// Half a unit in the fifth significant digit of `reference`.
double five_digit_tolerance(double reference) {
    return 0.5 * std::pow(10.0, std::floor(std::log10(std::abs(reference))) - 4.0);
}

} // namespace

TEST(BesselJn, ValuesAtZero) {
    EXPECT_EQ(bessel_jn(0, 0.0), 1.0);
    EXPECT_EQ(bessel_jn(1, 0.0), 0.0);
    EXPECT_EQ(bessel_jn(7, 0.0), 0.0);
}

TEST(BesselJn, TabulatedZerosVanish) {
    EXPECT_NEAR(bessel_jn(0, 2.40483), 0.0, 1e-5);
    EXPECT_NEAR(bessel_jn(1, 3.83170), 0.0, 1e-5);
}

TEST(BesselJn, MatchesBoostWithinContract) {
    double worst = 0.0;
    for (int n = 0; n <= 60; ++n) {
        for (double x = -50.0; x <= 50.0; x += 0.173) {
            const double ref = boost::math::cyl_bessel_j(n, x);
            worst = std::max(worst, std::abs(bessel_jn(n, x) - ref));
        }
        for (double x : {50.0, -50.0, 1e-8, 1.999999, 2.000001}) {
            worst = std::max(worst, std::abs(bessel_jn(n, x) - boost::math::cyl_bessel_j(n, x)));
        }
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(BesselJn, LargeArgumentBranches) {
    for (double x : {120.0, 900.0, 2.4e4, 2.6e4, 1e5, 3.3e6}) {
        for (int n : {0, 1, 2, 5}) {
            const double ref = boost::math::cyl_bessel_j(n, x);
            EXPECT_NEAR(bessel_jn(n, x), ref, 1e-12) << "n=" << n << " x=" << x;
        }
    }
}

TEST(BesselJn, RejectsInvalidInput) {
    EXPECT_THROW(bessel_jn(0, std::nan("")), qsync::InvalidInput);
    EXPECT_THROW(bessel_jn(0, INFINITY), qsync::InvalidInput);
    EXPECT_THROW(bessel_jn(-1, 1.0), qsync::InvalidInput);
}

TEST(BesselJn, ThreeTermRecurrence) {
    for (int n = 1; n <= 10; ++n) {
        for (double x = 0.5; x <= 40.0; x += 0.25) {
            const double lhs = bessel_jn(n - 1, x) + bessel_jn(n + 1, x);
            const double rhs = 2.0 * n / x * bessel_jn(n, x);
            ASSERT_NEAR(lhs, rhs, 1e-9) << "n=" << n << " x=" << x;
        }
    }
}

TEST(JacobiAnger, SineArgumentSeriesConverges) {
    for (double a = 0.0; a <= 12.0; a += 0.75) {
        for (double tau = 0.0; tau < 2.0 * std::numbers::pi; tau += 0.31) {
            const std::complex<double> exact = std::polar(1.0, a * std::sin(tau));
            ASSERT_LT(std::abs(exact - qsync::jacobi_anger_sin(a, tau, 40)), 1e-8) << "a=" << a << " tau=" << tau;
        }
    }
}

// The i^n cos(n tau) form of the series expands exp(i a cos tau); it is not
// the expansion of the sine-argument exponential used by the kernel.
TEST(JacobiAnger, CosineArgumentSeries) {
    for (double a = 0.0; a <= 12.0; a += 0.75) {
        for (double tau = 0.0; tau < 2.0 * std::numbers::pi; tau += 0.31) {
            std::complex<double> sum = bessel_jn(0, a);
            std::complex<double> in = 1.0;
            for (int n = 1; n <= 40; ++n) {
                in *= std::complex<double>(0.0, 1.0);
                sum += 2.0 * in * bessel_jn(n, a) * std::cos(n * tau);
            }
            ASSERT_LT(std::abs(std::polar(1.0, a * std::cos(tau)) - sum), 1e-8);
        }
    }
    const double a = 2.0;
    const double tau = std::numbers::pi / 2.0;
    std::complex<double> sum = bessel_jn(0, a);
    std::complex<double> in = 1.0;
    for (int n = 1; n <= 40; ++n) {
        in *= std::complex<double>(0.0, 1.0);
        sum += 2.0 * in * bessel_jn(n, a) * std::cos(n * tau);
    }
    EXPECT_GT(std::abs(std::polar(1.0, a * std::sin(tau)) - sum), 0.1);
}

TEST(JnZero, TabulatedValues) {
    EXPECT_NEAR(jn_zero(0, 1), 2.40483, 5e-6);
    EXPECT_NEAR(jn_zero(0, 2), 5.52008, 5e-6);
    EXPECT_NEAR(jn_zero(0, 3), 8.65373, 5e-6);
    EXPECT_NEAR(jn_zero(0, 4), 11.7915, 5e-5);
    EXPECT_NEAR(jn_zero(2, 1), 5.13562, 5e-6);
    EXPECT_NEAR(jn_zero(3, 1), 6.38016, 5e-6);
}

TEST(JnZero, FirstZeroOfJ1) {
    // 3.8317059702...: the tabulated 3.83170 is truncated, not rounded.
    const double z = jn_zero(1, 1);
    EXPECT_NEAR(z, 3.83170, five_digit_tolerance(3.83170));
    EXPECT_NEAR(z, 3.83171, 5e-6);
}

TEST(JnZero, MatchesBoostZeros) {
    for (int n = 0; n <= 10; ++n) {
        const auto table = qsync::bessel_zero_table(n, 20);
        ASSERT_EQ(table.zeros.size(), 20u);
        for (int k = 1; k <= 20; ++k) {
            const double ref = boost::math::cyl_bessel_j_zero(static_cast<double>(n), k);
            EXPECT_NEAR(table.zeros[k - 1], ref, 1e-10) << "n=" << n << " k=" << k;
        }
    }
}

TEST(JnZero, TableInvariants) {
    for (int n = 0; n <= 12; ++n) {
        const auto table = qsync::bessel_zero_table(n, 30);
        EXPECT_EQ(table.order, n);
        for (std::size_t k = 0; k < table.zeros.size(); ++k) {
            EXPECT_LT(std::abs(bessel_jn(n, table.zeros[k])), 1e-10);
            if (k > 0) EXPECT_GT(table.zeros[k], table.zeros[k - 1]);
        }
    }
}

TEST(JnZero, Interlacing) {
    for (int n = 0; n <= 8; ++n) {
        const auto a = qsync::bessel_zero_table(n, 11).zeros;
        const auto b = qsync::bessel_zero_table(n + 1, 10).zeros;
        for (std::size_t k = 0; k < 10; ++k) {
            EXPECT_LT(a[k], b[k]);
            EXPECT_LT(b[k], a[k + 1]);
        }
    }
}

TEST(JnZero, RejectsInvalidInput) {
    EXPECT_THROW(jn_zero(0, 0), qsync::InvalidInput);
    EXPECT_THROW(jn_zero(-1, 1), qsync::InvalidInput);
    EXPECT_THROW(qsync::bessel_zero_table(0, 0), qsync::InvalidInput);
}
