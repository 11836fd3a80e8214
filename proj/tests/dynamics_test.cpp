#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qsync/bessel.hpp"
#include "qsync/dynamics.hpp"
#include "qsync/quadrature.hpp"

using namespace qsync;

namespace {

constexpr double j01 = 2.404825557695773;

double max_error_vs_analytic(const AmplitudeTrajectory& traj, const SystemParams& p) {
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        worst = std::max(worst, std::abs(traj.values[i] - analytic_unmodulated(p, traj.time(i))));
    return worst;
}

double min_abs(const AmplitudeTrajectory& traj) {
    double m = 1.0;
    for (complex b : traj.values) m = std::min(m, std::abs(b));
    return m;
}

} // namespace

TEST(ModulationFactor, Examples) {
    EXPECT_EQ(modulation_factor(SystemParams::unmodulated(1.0), 3.7), complex(1.0));
    EXPECT_EQ(modulation_factor(SystemParams::modulated(1.0, 5.0, 0.9), 0.0), complex(1.0));
    const auto p = SystemParams::modulated(1.0, 2.40483, 1.0);
    const complex f = modulation_factor(p, std::numbers::pi / 2.0);
    EXPECT_NEAR(std::abs(f - std::polar(1.0, 2.40483)), 0.0, 1e-12);
}

TEST(ModulationFactor, UnitModulus) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const auto p = SystemParams::modulated(1.0, u(rng), 0.01 + u(rng));
        EXPECT_NEAR(std::abs(modulation_factor(p, u(rng))), 1.0, 1e-14);
    }
}

TEST(Kernel, Examples) {
    const auto off = SystemParams::unmodulated(1.0);
    EXPECT_NEAR(std::abs(kernel(off, 2.0, 2.0) - 0.5), 0.0, 1e-15);
    const auto p = SystemParams::unmodulated(3.0);
    EXPECT_NEAR(std::abs(kernel(p, 1.0, 0.0) - 1.5 * std::exp(-3.0)), 0.0, 1e-15);
    EXPECT_THROW(kernel(p, 1.0, 2.0), InvalidInput);
    EXPECT_THROW(kernel(p, 1.0, -0.1), InvalidInput);
}

TEST(Kernel, SeparableInDrivePhase) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const auto p = SystemParams::modulated(0.01 + 3.0 * u(rng), 20.0 * u(rng), 0.05 + 10.0 * u(rng));
        const double t = 100.0 * u(rng);
        const double tp = t * u(rng);
        const complex expect = 0.5 * p.gamma * p.lambda * std::exp(-p.lambda * (t - tp)) * modulation_factor(p, t) *
                               std::conj(modulation_factor(p, tp));
        const complex got = kernel(p, t, tp);
        EXPECT_LE(std::abs(got - expect), 1e-14 * std::max(1.0, std::abs(expect)));
    }
}

TEST(KernelTruncated, ZeroOrderAtBesselZeroVanishes) {
    const auto p = SystemParams::modulated(1.0, jn_zero(0, 1) * 2.0, 2.0);
    for (double t : {0.0, 0.3, 5.0, 17.0})
        EXPECT_LT(std::abs(kernel_truncated(p, t + 1.0, t, 0)), 1e-10 * 0.5 * p.gamma * p.lambda);
}

TEST(KernelTruncated, NoModulationDepthReducesToExact) {
    const auto p = SystemParams::modulated(2.0, 0.0, 3.0);
    EXPECT_NEAR(std::abs(kernel_truncated(p, 4.0, 1.0, 0) - kernel(p, 4.0, 1.0)), 0.0, 1e-15);
}

TEST(KernelTruncated, ConvergesToExact) {
    const auto p = SystemParams::modulated(0.5, 5.0, 1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double t = 30.0 * u(rng);
        const double tp = t * u(rng);
        const complex exact = kernel(p, t, tp);
        EXPECT_LT(std::abs(kernel_truncated(p, t, tp, 40) - exact), 1e-8);
    }
    const double t = 2.1;
    const double tp = 0.4;
    const double e2 = std::abs(kernel_truncated(p, t, tp, 2) - kernel(p, t, tp));
    const double e6 = std::abs(kernel_truncated(p, t, tp, 6) - kernel(p, t, tp));
    const double e12 = std::abs(kernel_truncated(p, t, tp, 12) - kernel(p, t, tp));
    EXPECT_GT(e2, e6);
    EXPECT_GT(e6, e12);
}

TEST(Analytic, InitialValue) {
    for (double l : {0.01, 1.0, 2.0, 3.0})
        EXPECT_EQ(analytic_unmodulated(SystemParams::unmodulated(l), 0.0), complex(1.0));
    EXPECT_THROW(analytic_unmodulated(SystemParams::modulated(1.0, 1.0, 1.0), 1.0), InvalidInput);
}

// The closed form must satisfy B' + int_0^t K B dt' = 0; checked with a
// centred difference and Simpson quadrature of the memory term.
TEST(Analytic, SatisfiesIntegroDifferentialEquation) {
    for (double l : {0.01, 0.3, 2.0, 2.0000001, 3.0}) {
        const auto p = SystemParams::unmodulated(l);
        for (double t : {0.5, 3.0, 11.0}) {
            const double h = 1e-5;
            const complex deriv = (analytic_unmodulated(p, t + h) - analytic_unmodulated(p, t - h)) / (2.0 * h);
            const std::size_t n = 4000;
            std::vector<double> re(n + 1), im(n + 1);
            for (std::size_t j = 0; j <= n; ++j) {
                const double tp = t * static_cast<double>(j) / n;
                const complex v = kernel(p, t, tp) * analytic_unmodulated(p, tp);
                re[j] = v.real();
                im[j] = v.imag();
            }
            const complex memory(composite_simpson(re, t / n), composite_simpson(im, t / n));
            EXPECT_LT(std::abs(deriv + memory), 1e-8) << "lambda=" << l << " t=" << t;
        }
    }
}

TEST(Analytic, StrongCouplingOscillationFrequency) {
    const auto p = SystemParams::unmodulated(0.01);
    std::vector<double> minima;
    double prev2 = 1.0, prev = 1.0;
    const double dt = 0.01;
    for (int i = 1; i < 40000; ++i) {
        const double v = std::norm(analytic_unmodulated(p, i * dt));
        if (i > 1 && prev < prev2 && prev < v) minima.push_back((i - 1) * dt);
        prev2 = prev;
        prev = v;
    }
    ASSERT_GE(minima.size(), 3u);
    const double period = minima[2] - minima[1];
    EXPECT_NEAR(period, 2.0 * std::numbers::pi / std::sqrt(2.0 * p.gamma * p.lambda), 0.01 * period);
}

TEST(SolveVolterra, MatchesAnalyticWeakCoupling) {
    const auto p = SystemParams::unmodulated(3.0);
    const auto traj = solve_volterra(p, default_grid(p, 10.0));
    EXPECT_EQ(traj.values.front(), complex(1.0));
    EXPECT_LT(max_error_vs_analytic(traj, p), 1e-5);
    EXPECT_EQ(traj.solver, "volterra-trapezoid");
}

TEST(SolveVolterra, SecondOrderConvergence) {
    const auto p = SystemParams::unmodulated(3.0);
    const double e1 = max_error_vs_analytic(solve_volterra(p, {10.0, 1000}), p);
    const double e2 = max_error_vs_analytic(solve_volterra(p, {10.0, 2000}), p);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.1);
}

TEST(SolveVolterra, TabulatedMatchesGenericKernel) {
    const auto p = SystemParams::modulated(0.4, 3.0, 1.3);
    const TimeGrid g{8.0, 800};
    const auto fast = solve_volterra(p, g);
    const auto slow = solve_volterra([&](double t, double tp) { return kernel(p, t, tp); }, g);
    EXPECT_LT(sup_norm_difference(fast, slow), 1e-12);
}

TEST(SolveVolterra, NonFiniteKernelDiverges) {
    EXPECT_THROW(solve_volterra([](double, double) { return complex(std::nan(""), 0.0); }, TimeGrid{1.0, 10}),
                 SolverDivergence);
}

TEST(SolveVolterra, CoarseGridWarns) {
    const auto p = SystemParams::modulated(3.0, 10.0, 100.0);
    const auto traj = solve_volterra(p, TimeGrid{1.0, 10});
    EXPECT_EQ(traj.warnings.size(), 2u);
    EXPECT_TRUE(solve_volterra(p, default_grid(p, 0.5)).warnings.empty());
}

TEST(SolveVolterra, RejectsInvalidInput) {
    EXPECT_THROW(solve_volterra(SystemParams::unmodulated(0.0), TimeGrid{1.0, 10}), InvalidInput);
    EXPECT_THROW(solve_volterra(SystemParams::unmodulated(1.0), TimeGrid{1.0, 1}), InvalidInput);
    EXPECT_THROW(solve_volterra(SystemParams::unmodulated(1.0), TimeGrid{-1.0, 10}), InvalidInput);
    auto bad = SystemParams::unmodulated(1.0);
    bad.modulation_on = true;
    EXPECT_THROW(solve_volterra(bad, TimeGrid{1.0, 10}), InvalidInput);
}

TEST(SolveVolterra, HighFrequencyFirstZeroDecouples) {
    const auto p = SystemParams::modulated(0.01, 2.40483 * 50.0, 50.0);
    const auto traj = solve_volterra(p, default_grid(p, 100.0));
    EXPECT_GT(std::abs(traj.values.back()), 0.9);
    const auto ref = solve_ode(p, traj.grid);
    EXPECT_LT(sup_norm_difference(traj, ref), 1e-4);
}

TEST(SolveOde, InitialConditions) {
    const auto traj = solve_ode(SystemParams::unmodulated(3.0), TimeGrid{10.0, 100});
    EXPECT_EQ(traj.values[0], complex(1.0));
    EXPECT_EQ(traj.memory[0], complex(0.0));
    EXPECT_EQ(traj.solver, "dopri5-dense");
}

TEST(SolveOde, MatchesAnalytic) {
    for (double l : {0.01, 2.0, 3.0}) {
        const auto p = SystemParams::unmodulated(l);
        EXPECT_LT(max_error_vs_analytic(solve_ode(p, TimeGrid{50.0, 5000}), p), 1e-8) << l;
    }
}

TEST(SolveOde, StrongCouplingRevivals) {
    const auto traj = solve_ode(SystemParams::unmodulated(0.01), TimeGrid{200.0, 2000});
    int rises = 0;
    for (std::size_t i = 1; i < traj.size(); ++i)
        if (std::abs(traj.values[i]) > std::abs(traj.values[i - 1]) + 1e-9) ++rises;
    EXPECT_GT(rises, 0);
}

TEST(SolveOde, WeakCouplingMonotoneDecay) {
    const auto traj = solve_ode(SystemParams::unmodulated(3.0), TimeGrid{20.0, 2000});
    for (std::size_t i = 1; i < traj.size(); ++i)
        EXPECT_LE(std::abs(traj.values[i]), std::abs(traj.values[i - 1]) + 1e-12);
}

TEST(SolveOde, ExhaustedStepBudgetIsDivergence) {
    const auto p = SystemParams::modulated(1.0, 1e16, 1e16);
    EXPECT_THROW(solve_ode(p, TimeGrid{1.0, 10}, {.allow_periodic = false, .max_steps = 100000}), SolverDivergence);
    const auto ok = SystemParams::modulated(1.0, 1.0, 1.0);
    EXPECT_THROW(solve_ode(ok, TimeGrid{100.0, 10}, {.max_steps = 5}), SolverDivergence);
    EXPECT_NO_THROW(solve_ode(ok, TimeGrid{100.0, 10}));
}

TEST(SolveOde, PeriodicPathMatchesDense) {
    const double omega = 5.0;
    const auto p = SystemParams::modulated(0.1, jn_zero(0, 2) * omega, omega);
    const TimeGrid g{200.0 * 2.0 * std::numbers::pi / omega, 200 * 16};
    const auto periodic = solve_ode(p, g);
    const auto dense = solve_ode(p, g, {.rel_tol = 1e-12, .abs_tol = 1e-15, .allow_periodic = false});
    EXPECT_EQ(periodic.solver, "dopri5-periodic");
    EXPECT_EQ(dense.solver, "dopri5-dense");
    EXPECT_LT(sup_norm_difference(periodic, dense), 1e-8);
}

// Both routes must agree on every regime, with and without the drive.
TEST(DualSolver, Agreement) {
    for (double l : {3.0, 0.01}) {
        for (double r : {0.0, j01, 5.0}) {
            const auto p = r == 0.0 ? SystemParams::unmodulated(l) : SystemParams::modulated(l, r * 1.0, 1.0);
            const auto g = default_grid(p, 50.0);
            const auto a = solve_volterra(p, g);
            const auto b = solve_ode(p, g);
            EXPECT_LT(sup_norm_difference(a, b), 1e-4) << "lambda=" << l << " ratio=" << r;
        }
    }
}

TEST(Contractivity, AmplitudeBounded) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 12; ++i) {
        const auto p = SystemParams::modulated(0.01 + 3.0 * u(rng), 15.0 * u(rng), 0.05 + 5.0 * u(rng));
        const auto g = default_grid(p, 30.0);
        for (const auto& traj : {solve_ode(p, g), solve_volterra(p, g)})
            for (complex b : traj.values) ASSERT_LE(std::abs(b), 1.0 + 1e-6);
    }
}

TEST(Decoupling, FirstZeroRetentionGrowsWithOmega) {
    double prev = 0.0;
    for (double w : {0.05, 0.5, 5.0, 50.0}) {
        const auto p = SystemParams::modulated(0.01, j01 * w, w);
        const double m = min_abs(solve_ode(p, default_grid(p, 100.0)));
        EXPECT_GE(m, prev - 1e-9) << "omega=" << w;
        prev = m;
    }
}

TEST(DefaultGrid, StepRule) {
    EXPECT_NEAR(default_grid(SystemParams::unmodulated(1.0), 100.0).dt(), 0.005, 1e-15);
    const auto p = SystemParams::modulated(1.0, 1.0, 50.0);
    EXPECT_LE(default_grid(p, 100.0).dt(), 2.0 * std::numbers::pi / 50.0 / 64.0 + 1e-15);
}
