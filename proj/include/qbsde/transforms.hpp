#pragma once

#include "qbsde/system.hpp"

namespace qbsde {

struct TransformSpec {
    Eigen::MatrixXd A;
    Eigen::MatrixXd A_inv;
    double det = 0.0;
    double condition_number = 0.0;
    std::string provenance;  // "2.11g" | "2.14b" | "2.12d" | "2.16b" | "user"
    GeneratorSpec derived;   // g_bar(t, y, z) = A g(t, A^{-1} y, A^{-1} z)
};

/// Conjugate a generator by an invertible matrix; the derived closure keeps
/// the original structural metadata.
TransformSpec apply_linear_transform(const GeneratorSpec& spec, const Eigen::MatrixXd& A,
                                     const std::string& provenance = "user");

/// First row b, identity below; det = b_1. A zero b_1 is rejected with a hint
/// at the permutation remedy.
Eigen::MatrixXd matrix_first_row(const Eigen::VectorXd& b);

/// First row b, rows i >= 2 carrying (-a_i, 0, .., a_1, .., 0);
/// det = a_1^{n-2} b^T a.
Eigen::MatrixXd matrix_shear(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

TransformSpec build_transform_2_11g(const GeneratorSpec& spec, const Eigen::VectorXd& b);
TransformSpec build_transform_2_14b(const GeneratorSpec& spec, const Eigen::VectorXd& a,
                                    const Eigen::VectorXd& b);

// ---------------------------------------------------------------------------
// solvability classifiers
// ---------------------------------------------------------------------------

struct GateReport {
    bool pass = false;
    int branch = 0;       // which alternative of the gate fired (1 or 2)
    double margin = 0.0;  // worst sampled slack of the firing branch
};

struct SolvabilityVerdict {
    bool applies = false;
    std::string reason;
    nlohmann::json margins;
    Eigen::MatrixXd A;  // emitted transform when the verdict applies
};

/// g = f + z h(b^T z): samples the continuity gate on f and the two growth
/// gates, then emits the first-row transform. A b with b_1 = 0 but some
/// b_i != 0 is routed through the obvious permutation first.
struct Classify212bInputs {
    GeneratorFn f;
    std::function<Eigen::VectorXd(const Eigen::RowVectorXd&)> h;
    Eigen::VectorXd b;
    StructuralParams params;      // gamma, beta, phi used by the gates
    double alpha_tilde_bound = 0.0;
    SamplePlan plan;
};
SolvabilityVerdict classify_2_12b(const Classify212bInputs& in);

/// The h/h_bar structured family with |z^i|^2 corrections: checks the growth
/// of h_bar and the inf/sup gates by sampling plus coordinate-descent
/// refinement on the worst point, then emits the first-row transform.
struct Classify214gInputs {
    std::function<Eigen::VectorXd(const Eigen::RowVectorXd&)> h;      // R^{1xd} -> R^d
    std::function<Eigen::VectorXd(const Eigen::RowVectorXd&)> h_bar;  // R^{1xd} -> R^n
    Eigen::VectorXd a;  // a_1 must be 0
    Eigen::VectorXd b;  // b_1 != 0
    double gamma_bar = 1.0;
    double c = 0.0;
    double L = 1.0;  // Lipschitz/growth constant of h and h_bar
    int d = 1;
    double W = 100.0;  // search radius for the inf/sup gates
    int samples = 20000;
    std::uint64_t seed = 1;
};
struct Verdict214g {
    bool applies = false;
    std::string reason;
    GateReport gate_2_15g;
    std::vector<GateReport> gates_2_16g;  // for i = 2..n
    double hbar_growth_margin = 0.0;
    Eigen::MatrixXd A;
};
Verdict214g classify_2_14g(const Classify214gInputs& in);

/// Two-dimensional purely quadratic pair g^i = z^T A_i z + z^T k_i + l_i:
/// searches (a, b, iota) with a A_1 + b A_2 = iota (a,b)^T (a,b) and tests the
/// sign condition on the congruent image of A_2.
struct Verdict216b {
    bool combination_found = false;
    double a = 0.0, b = 0.0, iota = 0.0;
    double residual = 0.0;
    double alpha11 = 0.0, alpha22 = 0.0;
    bool applies = false;
};
Verdict216b check_prop_2_16b(const Eigen::Matrix2d& A1, const Eigen::Matrix2d& A2,
                             const Eigen::Vector2d& k1 = Eigen::Vector2d::Zero(),
                             const Eigen::Vector2d& k2 = Eigen::Vector2d::Zero(), double l1 = 0.0,
                             double l2 = 0.0);

/// 1/alpha + 1/beta = 1 within 1e-12.
bool check_cor_2_15b(double alpha, double beta);

/// Non-solvability detector for the pair (theta1 |z^1|^2 + vartheta1 |z^2|^2,
/// vartheta2 |z^1|^2 + theta2 |z^2|^2): flags theta1 = vartheta1 = 0 with
/// theta2 vartheta2 > 0 and returns the diagonal scaling that maps the system
/// to the canonical (0, |z^1|^2 + 1/2 |z^2|^2) form, verified by sampling.
struct Verdict212d {
    bool nonsolvable = false;
    Eigen::Matrix2d scaling = Eigen::Matrix2d::Identity();
    double coeff1 = 0.0, coeff2 = 0.0;
    double check_error = 0.0;
};
Verdict212d check_thm_2_12d(double theta1, double vartheta1, double theta2, double vartheta2);

// ---------------------------------------------------------------------------
// terminal shift
// ---------------------------------------------------------------------------

struct ShiftedProblem {
    SystemProblem problem;            // terminal xi_bar, generator g(.. + int H dB, .. + H)
    PathProcess shift_integral;       // int_0^t H dB, per component
};

/// Rewrites xi = xi_bar + int_0^T H dB as a bounded-terminal problem with the
/// shifted generator; unshift_solution restores (Y, Z) = (Y_bar + int H dB,
/// Z_bar + H).
ShiftedProblem shift_terminal(const GeneratorSpec& spec, const PathProcess& H,
                              const Eigen::MatrixXd& xi_bar, const BrownianEnsemble& ens,
                              const Interval& window);

void unshift_solution(SystemSolution& sol, const PathProcess& H, const PathProcess& shift_integral);

}  // namespace qbsde
