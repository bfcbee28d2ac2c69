#include "qbsde/paths.hpp"

#include <cmath>
#include <stdexcept>

#include "qbsde/rng.hpp"

namespace qbsde {

BrownianEnsemble generate_paths(std::uint64_t seed, int M, const TimeGrid& grid, int d) {
    if (M < 1) throw std::invalid_argument("generate_paths: M must be >= 1");
    if (d < 1) throw std::invalid_argument("generate_paths: d must be >= 1");

    BrownianEnsemble ens;
    ens.grid = grid;
    ens.d = d;
    ens.M = M;
    ens.seed = seed;
    const int N = grid.N;
    const double sd = std::sqrt(grid.dt());
    ens.increments.resize(static_cast<std::size_t>(M) * N * d);
    ens.bvalues.assign(static_cast<std::size_t>(M) * (N + 1) * d, 0.0);

    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < N; ++k) {
            for (int j = 0; j < d; ++j) {
                const double g = sd * counter_gaussian(seed, m, k, j);
                ens.increments[(static_cast<std::size_t>(m) * N + k) * d + j] = g;
                ens.bvalues[(static_cast<std::size_t>(m) * (N + 1) + k + 1) * d + j] =
                    ens.bvalues[(static_cast<std::size_t>(m) * (N + 1) + k) * d + j] + g;
            }
        }
    }
    return ens;
}

PathProcess::PathProcess(const BrownianEnsemble& e, int k) : ens(&e), dim(k) {
    if (k < 1) throw std::invalid_argument("PathProcess: dim must be >= 1");
    values.assign(static_cast<std::size_t>(e.M) * (e.grid.N + 1) * k, 0.0);
}

static void require_same_ensemble(const PathProcess& p, const BrownianEnsemble& ens) {
    if (p.ens != &ens) throw std::invalid_argument("process bound to a different ensemble");
}

PathProcess ito_integral(const PathProcess& integrand, const BrownianEnsemble& ens) {
    require_same_ensemble(integrand, ens);
    if (integrand.dim != ens.d)
        throw std::invalid_argument("ito_integral: integrand dim must equal Brownian d");
    if (!integrand.adapted)
        throw std::invalid_argument("ito_integral: integrand must be adapted");

    PathProcess out(ens, 1);
    const int N = ens.grid.N;
    for (int m = 0; m < ens.M; ++m) {
        double acc = 0.0;
        out.at(m, 0, 0) = 0.0;
        for (int k = 0; k < N; ++k) {
            double dot = 0.0;
            for (int j = 0; j < ens.d; ++j) dot += integrand.at(m, k, j) * ens.inc(m, k, j);
            acc += dot;
            out.at(m, k + 1, 0) = acc;
        }
    }
    return out;
}

PathProcess time_integral(const PathProcess& integrand, const BrownianEnsemble& ens) {
    require_same_ensemble(integrand, ens);
    if (!integrand.adapted)
        throw std::invalid_argument("time_integral: integrand must be adapted");

    PathProcess out(ens, integrand.dim);
    const int N = ens.grid.N;
    const double dt = ens.grid.dt();
    for (int m = 0; m < ens.M; ++m) {
        for (int c = 0; c < integrand.dim; ++c) {
            double acc = 0.0;
            out.at(m, 0, c) = 0.0;
            for (int k = 0; k < N; ++k) {
                acc += integrand.at(m, k, c) * dt;
                out.at(m, k + 1, c) = acc;
            }
        }
    }
    return out;
}

PathProcess brownian_process(const BrownianEnsemble& ens) {
    PathProcess out(ens, ens.d);
    out.values = ens.bvalues;
    return out;
}

PathProcess squared_norm_process(const PathProcess& p) {
    PathProcess out(*p.ens, 1);
    out.adapted = p.adapted;
    for (int m = 0; m < p.paths(); ++m)
        for (int k = 0; k < p.times(); ++k) {
            double s = 0.0;
            for (int c = 0; c < p.dim; ++c) {
                const double v = p.at(m, k, c);
                s += v * v;
            }
            out.at(m, k, 0) = s;
        }
    return out;
}

PathProcess difference(const PathProcess& a, const PathProcess& b) {
    if (a.ens != b.ens || a.dim != b.dim)
        throw std::invalid_argument("difference: shape mismatch");
    PathProcess out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

}  // namespace qbsde
