#pragma once

#include <cstddef>
#include <span>

#include "qsync/error.hpp"

namespace qsync {

/// Composite Simpson rule over uniformly spaced samples. With an odd number of
/// intervals the last three are handled by Simpson's 3/8 rule.
inline double composite_simpson(std::span<const double> f, double h) {
    const std::size_t n = f.size();
    if (n < 3) throw InvalidInput("composite_simpson: need at least 3 samples");
    std::size_t intervals = n - 1;
    double tail = 0.0;
    if (intervals % 2 == 1) {
        if (n < 4) throw InvalidInput("composite_simpson: need at least 4 samples for an odd interval count");
        tail = 3.0 * h / 8.0 * (f[n - 4] + 3.0 * f[n - 3] + 3.0 * f[n - 2] + f[n - 1]);
        intervals -= 3;
    }
    double sum = 0.0;
    if (intervals > 0) {
        sum = f[0] + f[intervals];
        for (std::size_t i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
        sum *= h / 3.0;
    }
    return sum + tail;
}

} // namespace qsync
