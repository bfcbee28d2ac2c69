#pragma once

#include <cstdint>
#include <vector>

#include "qbsde/grid.hpp"

namespace qbsde {

/// M simulated d-dimensional Brownian paths on a uniform grid.
/// increments[m][k][j] ~ N(0, T/N), independent across all indices, and a
/// pure function of (seed, m, k, j).
struct BrownianEnsemble {
    TimeGrid grid;
    int d = 1;
    int M = 1;
    std::uint64_t seed = 0;
    std::vector<double> increments;  // M * N * d
    std::vector<double> bvalues;     // M * (N+1) * d, cumulative sums, B_0 = 0

    double inc(int m, int k, int j) const {
        return increments[(static_cast<std::size_t>(m) * grid.N + k) * d + j];
    }
    double b(int m, int k, int j) const {
        return bvalues[(static_cast<std::size_t>(m) * (grid.N + 1) + k) * d + j];
    }
};

BrownianEnsemble generate_paths(std::uint64_t seed, int M, const TimeGrid& grid, int d);

/// Pathwise process on the grid: values[m][k][c], k = 0..N, c = 0..dim-1.
/// Adapted means the value at t_k depends only on increments before t_k.
struct PathProcess {
    const BrownianEnsemble* ens = nullptr;
    int dim = 1;
    bool adapted = true;
    std::vector<double> values;  // M * (N+1) * dim

    PathProcess() = default;
    PathProcess(const BrownianEnsemble& e, int k);

    double& at(int m, int k, int c) {
        return values[(static_cast<std::size_t>(m) * (ens->grid.N + 1) + k) * dim + c];
    }
    double at(int m, int k, int c) const {
        return values[(static_cast<std::size_t>(m) * (ens->grid.N + 1) + k) * dim + c];
    }
    int paths() const { return ens->M; }
    int times() const { return ens->grid.N + 1; }
};

/// Cumulative Ito sums: out at t_k is sum_{j<k} integrand(t_j) . dB_j.
/// The integrand must be adapted with dim == ensemble d (one row per path).
PathProcess ito_integral(const PathProcess& integrand, const BrownianEnsemble& ens);

/// Cumulative left-endpoint Riemann sums: out at t_k is sum_{j<k} integrand(t_j) dt,
/// componentwise.
PathProcess time_integral(const PathProcess& integrand, const BrownianEnsemble& ens);

/// Process whose value is B_{t_k} (dim = d).
PathProcess brownian_process(const BrownianEnsemble& ens);

/// Elementwise helpers used throughout the estimators.
PathProcess squared_norm_process(const PathProcess& p);                 // |p_{t_k}|^2, dim 1
PathProcess difference(const PathProcess& a, const PathProcess& b);    // a - b

}  // namespace qbsde
