// Compares synchronization lifetimes with d/Omega on the zeros of J_0 against
// an untuned drive and the unmodulated qubit (lambda = 0.1 gamma, Omega = 5 gamma).

#include <cstdio>
#include <numbers>

#include "qsync/qsync.hpp"

int main() {
    using namespace qsync;
    constexpr double omega = 5.0;
    constexpr std::size_t periods = 100000;
    const TimeGrid grid{periods * 2.0 * std::numbers::pi / omega, periods * 4};
    const auto init = InitialState::equal_superposition();

    const auto baseline = sync_series(SystemParams::unmodulated(0.1), init, TimeGrid{500.0, 50000}, 0.0);
    std::printf("unmodulated          lifetime %10.1f\n", sync_lifetime(baseline));
    const auto untuned = sync_series(SystemParams::modulated(0.1, 5.0, omega), init, grid, 0.0);
    std::printf("d = 5 gamma          lifetime %10.1f\n", sync_lifetime(untuned));

    for (const auto& row : bessel_zero_comparison(SystemParams::modulated(0.1, 0.0, omega), {1, 2, 3, 4}, init, grid))
        std::printf("d/Omega = %-10.6g lifetime %10.1f\n", row.zero, row.lifetime);
}
