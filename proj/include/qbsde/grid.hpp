#pragma once

#include <cmath>
#include <stdexcept>

namespace qbsde {

/// Uniform time grid on [0, T] with N steps, t_k = k*T/N.
struct TimeGrid {
    double T = 1.0;
    int N = 1;

    TimeGrid() = default;
    TimeGrid(double horizon, int steps) : T(horizon), N(steps) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: T must be > 0");
        if (N < 1) throw std::invalid_argument("TimeGrid: N must be >= 1");
    }

    double dt() const { return T / N; }
    double t(int k) const { return k * T / N; }
};

/// Closed index range [ka, kb] of grid times, the discrete stand-in for a
/// sub-interval [a, b] of [0, T].
struct Interval {
    int ka = 0;
    int kb = 0;

    int steps() const { return kb - ka; }
};

inline Interval make_interval(const TimeGrid& grid, double a, double b) {
    const double dt = grid.dt();
    const double ra = a / dt;
    const double rb = b / dt;
    const int ka = static_cast<int>(std::lround(ra));
    const int kb = static_cast<int>(std::lround(rb));
    if (std::abs(ra - ka) > 1e-9 || std::abs(rb - kb) > 1e-9)
        throw std::invalid_argument("make_interval: endpoints must lie on the grid");
    if (ka < 0 || kb > grid.N || ka >= kb)
        throw std::invalid_argument("make_interval: empty or out-of-range interval");
    return Interval{ka, kb};
}

inline Interval full_interval(const TimeGrid& grid) { return Interval{0, grid.N}; }

}  // namespace qbsde
