#pragma once

#include "qbsde/generators.hpp"
#include "qbsde/onedim.hpp"

namespace qbsde {

struct SystemProblem {
    const BrownianEnsemble* ens = nullptr;
    Interval window;
    GeneratorSpec spec;
    Eigen::MatrixXd terminal;  // M x n
    double terminal_bound = 0.0;
};

struct SystemSolveOptions {
    Scalar1dOptions scalar;
    int max_outer_iters = 25;
    double distance_tol = 1e-3;
};

struct WindowRecord {
    int index = 0;
    Interval window;
    bool converged = false;
    int iterations = 0;
    double sup_Y = 0.0;
    double bmo2_Z = 0.0;
};

struct SystemSolution {
    PathProcess Y;  // dim n
    PathProcess Z;  // dim n*d, row-major rows
    std::vector<double> distance_log;       // d_1, d_2, ...
    std::vector<double> contraction_ratios; // d_{k+1}/d_k
    bool converged = false;
    bool diverged = false;
    double sup_Y = 0.0;
    double bmo2_Z = 0.0;
    // provenance of the rows fed to component i's scalar solve:
    // 'F' fresh row solved in this sweep, 'S' the component's own unknown,
    // 'V' frozen from the input pair
    std::vector<std::string> row_provenance;
    std::vector<WindowRecord> windows;
};

/// One sweep of the sequential map: component i is solved as a scalar BSDE
/// whose generator sees y frozen at U and the z matrix assembled from rows
/// 1..i-1 of the freshly solved Z, the unknown row i, and rows i+1..n of V.
SystemSolution gamma_map(const PathProcess& U, const PathProcess& V, const SystemProblem& problem,
                         const SystemSolveOptions& opts = {});

/// Fixed-point iteration of the sequential map, started from the
/// zero-generator solve unless an initial pair is supplied. Non-convergence
/// is reported in the result (diverged flag plus the distance log), not
/// thrown.
SystemSolution picard_solve(const SystemProblem& problem, const SystemSolveOptions& opts = {},
                            const PathProcess* U0 = nullptr, const PathProcess* V0 = nullptr);

/// Backward interval pasting: solve on [T-eps, T], reuse Y at the window
/// start as the next terminal value, repeat back to the window start of the
/// problem, and concatenate.
SystemSolution paste_intervals(const SystemProblem& problem, double eps,
                               const SystemSolveOptions& opts = {});

/// Raw pathwise defect of the discrete BSDE identity, M x n.
Eigen::MatrixXd residual_paths(const PathProcess& Y, const PathProcess& Z,
                               const SystemProblem& problem);

/// Per-component RMS of residual_paths; with max_over_start_times, the
/// identity is re-anchored at every grid time in the window and the worst RMS
/// is reported.
Eigen::VectorXd residual_check(const SystemSolution& sol, const SystemProblem& problem,
                               bool max_over_start_times = false);

/// n independent zero-generator scalar solves: the default initial pair.
SystemSolution conditional_expectation_solve(const SystemProblem& problem,
                                             const SystemSolveOptions& opts = {});

}  // namespace qbsde
