#pragma once

#include <functional>

#include "qbsde/norms.hpp"
#include "qbsde/regression.hpp"

namespace qbsde {

/// Scalar generator evaluated pathwise; (m, k) give the path and time index so
/// closures can read frozen rows or parameter processes.
using Generator1d =
    std::function<double(int m, int k, double t, double y, const Eigen::RowVectorXd& z)>;

struct ScalarBSDEProblem {
    const BrownianEnsemble* ens = nullptr;
    Interval window;
    Eigen::VectorXd terminal;  // per path, measurable at the window end
    double terminal_bound = 0.0;
    Generator1d generator;
};

struct Scalar1dOptions {
    int basis_degree = 3;
    double ridge = 1e-8;
    int picard_iters = 20;
    double tolerance = 1e-10;
    double z_radius = 50.0;
    bool compute_norms = true;  // sup/BMO diagnostics of the solution
};

struct ScalarSolution {
    PathProcess Y;  // dim 1, values on [a,b]
    PathProcess Z;  // dim d, values on [a,b)
    double residual_rms = 0.0;
    int inner_iters_max = 0;
    bool inner_converged = true;
    bool truncation_active = false;
    double sup_Y = 0.0;
    double bmo_Z = 0.0;
};

/// Backward least-squares scheme: Z by regression of Y_{k+1} dB_k / dt, Y by
/// an inner fixed point on y -> E_k[Y_{k+1}] + g(t_k, y, Z_k) dt.
ScalarSolution solve_1d(const ScalarBSDEProblem& problem, const Scalar1dOptions& opts = {});

/// t = 0 value of the purely quadratic BSDE with generator (gamma/2)|z|^2 via
/// the exponential transform: (1/gamma) ln E[exp(gamma xi)].
double exp_transform_oracle(double gamma, const Eigen::VectorXd& terminal, double exp_cap = 700.0);

/// Right-hand sides of the scalar a priori estimates; which selects the
/// growth regime the bound formula belongs to.
enum class AprioriCase { A1, A3, A4 };

struct AprioriInputs {
    double eta_sup = 0.0;          // ||eta||_inf
    double alpha_check_einf = 0.0; // E-infinity budget (A1)
    double alpha_dot_minf = 0.0;   // M-infinity budget (A1, A4)
    double alpha_ddot_linf = 0.0;  // L-infinity budget (A3)
    double u_bar_bmo = 0.0;        // BMO budget of the linear z coefficient (A3)
    double gamma = 1.0;
    double gamma_bar = 1.0;
    double beta_bar = 0.0;
    double lambda_bar = 0.0;
    double T = 1.0;
    double c0 = 2.0;               // abstract uniform constant, config input
};

struct AprioriReport {
    AprioriCase which;
    double bound = 0.0;
    double lhs = 0.0;  // sup_norm(Y) + bmo(Z)^2
    bool satisfied = false;
};

double apriori_bound_value(AprioriCase which, const AprioriInputs& in);
AprioriReport apriori_bounds_check(const ScalarSolution& sol, AprioriCase which,
                                   const AprioriInputs& in);

}  // namespace qbsde
