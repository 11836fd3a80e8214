// state.hpp -- Reduced qubit state, Husimi Q-function and the phase
// synchronization measure S(phi, t).

#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "qsync/dynamics.hpp"
#include "qsync/error.hpp"
#include "qsync/quadrature.hpp"

namespace qsync {

/// Pure initial qubit state c_g|g> + c_e|e>; the reservoir starts in vacuum.
struct InitialState {
    // 1/sqrt2 rounded down and up: c_e conj(c_g) is exactly 1/2 and the norm exactly 1.
    complex c_g{0.7071067811865475, 0.0};
    complex c_e{0.7071067811865476, 0.0};

    static InitialState equal_superposition() { return {}; }

    static InitialState from_polar(double abs_g, double arg_g, double abs_e, double arg_e) {
        return {std::polar(abs_g, arg_g), std::polar(abs_e, arg_e)};
    }

    void validate() const {
        const double norm = std::norm(c_g) + std::norm(c_e);
        if (!(std::abs(norm - 1.0) <= 1e-12)) throw InvalidInput("initial state must satisfy |c_g|^2 + |c_e|^2 = 1");
    }

    bool operator==(const InitialState&) const = default;
};

/// 2x2 reduced density matrix in the {|e>, |g>} basis.
struct QubitState {
    complex rho_ee{0.0};
    complex rho_eg{0.0};
    complex rho_ge{0.0};
    complex rho_gg{1.0};

    static QubitState maximally_mixed() { return {0.5, 0.0, 0.0, 0.5}; }

    complex trace() const { return rho_ee + rho_gg; }

    double purity() const {
        return (rho_ee * rho_ee + rho_eg * rho_ge + rho_ge * rho_eg + rho_gg * rho_gg).real();
    }

    double determinant() const { return (rho_ee * rho_gg - rho_eg * rho_ge).real(); }
};

/// rho(t) from the initial state and the amplitude b = B(t).
inline QubitState density_matrix(const InitialState& init, complex b) {
    if (!(std::abs(b) <= 1.0 + 1e-6)) throw InvalidInput("density_matrix: |B| exceeds 1");
    QubitState s;
    const double ee = std::norm(init.c_e) * std::norm(b);
    s.rho_ee = ee;
    s.rho_eg = init.c_e * std::conj(init.c_g) * b;
    s.rho_ge = std::conj(s.rho_eg);
    s.rho_gg = 1.0 - ee;
    return s;
}

/// Q(theta, phi) = (1/2pi) [cos(theta) rho_ee + sin(theta) Re(e^{i phi} rho_eg) + sin^2(theta/2)].
inline double husimi_q(const QubitState& state, double theta, double phi) {
    const double half = std::sin(0.5 * theta);
    const double coherent = (std::polar(1.0, phi) * state.rho_eg).real();
    return (std::cos(theta) * state.rho_ee.real() + std::sin(theta) * coherent + half * half) /
           (2.0 * std::numbers::pi);
}

/// Husimi function sampled on a (theta, phi) mesh.
///
/// theta spans [0, pi] including both endpoints; phi spans [0, 2pi) without
/// the periodic endpoint. Values are stored theta-major.
struct QGrid {
    std::vector<double> theta;
    std::vector<double> phi;
    std::vector<double> q;
    /// Composite-quadrature value of the integral of Q sin(theta) over the sphere.
    double normalization = 0.0;

    double at(std::size_t i_theta, std::size_t i_phi) const { return q.at(i_theta * phi.size() + i_phi); }
};

inline QGrid husimi_grid(const QubitState& state, std::size_t n_theta, std::size_t n_phi) {
    if (n_theta < 8 || n_phi < 8) throw InvalidInput("husimi_grid: mesh needs at least 8 points per axis");
    QGrid g;
    g.theta.resize(n_theta);
    g.phi.resize(n_phi);
    for (std::size_t i = 0; i < n_theta; ++i)
        g.theta[i] = std::numbers::pi * static_cast<double>(i) / static_cast<double>(n_theta - 1);
    for (std::size_t j = 0; j < n_phi; ++j)
        g.phi[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_phi);
    g.q.resize(n_theta * n_phi);
    for (std::size_t i = 0; i < n_theta; ++i)
        for (std::size_t j = 0; j < n_phi; ++j) g.q[i * n_phi + j] = husimi_q(state, g.theta[i], g.phi[j]);

    // phi: periodic rectangle rule; theta: composite Simpson.
    std::vector<double> ring(n_theta);
    const double dphi = 2.0 * std::numbers::pi / static_cast<double>(n_phi);
    for (std::size_t i = 0; i < n_theta; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_phi; ++j) s += g.q[i * n_phi + j];
        ring[i] = s * dphi * std::sin(g.theta[i]);
    }
    g.normalization = composite_simpson(ring, std::numbers::pi / static_cast<double>(n_theta - 1));
    return g;
}

/// S(phi) = Re(e^{i phi} rho_eg) / 4, the theta-integrated Q minus its uniform value.
inline double sync_measure(const QubitState& state, double phi) {
    return 0.25 * (std::polar(1.0, phi) * state.rho_eg).real();
}

/// S(phi) by Simpson quadrature of sin(theta) Q(theta, phi) over theta, minus 1/2pi.
inline double sync_measure_integral(const QubitState& state, double phi, std::size_t nodes = 401) {
    if (nodes < 201) throw InvalidInput("sync_measure_integral: at least 201 nodes required");
    if (nodes % 2 == 0) ++nodes;
    const double h = std::numbers::pi / static_cast<double>(nodes - 1);
    std::vector<double> f(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
        const double theta = h * static_cast<double>(i);
        f[i] = std::sin(theta) * husimi_q(state, theta, phi);
    }
    return composite_simpson(f, h) - 1.0 / (2.0 * std::numbers::pi);
}

/// S(phi, t) sampled on a time grid.
struct SyncSeries {
    double phi = 0.0;
    TimeGrid grid;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double time(std::size_t i) const { return grid.time(i); }
};

} // namespace qsync
