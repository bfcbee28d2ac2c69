#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "qbsde/paths.hpp"

namespace qbsde {

/// The fixed structural constants of the growth/continuity assumptions:
/// 0 < gamma_bar <= gamma, delta in [0,1), everything else >= 0, p > 1
/// (p = 1 only together with lambda = 0), and a nondecreasing growth
/// function phi on [0, inf).
struct StructuralParams {
    int n = 1;
    int d = 1;
    double gamma = 2.0;
    double gamma_bar = 1.0;
    double lambda = 0.0;
    double lambda_bar = 0.0;
    double c = 0.0;
    double c_bar = 0.0;
    double theta = 0.0;
    double delta = 0.0;
    double beta = 0.0;
    double p = 2.0;
    std::function<double(double)> phi = [](double) { return 0.0; };

    void validate() const;
};

/// Values of the parameter processes (v, alpha_tilde, alpha_bar, alpha) at a
/// single (omega, t); the generator evaluator receives them alongside (t,y,z).
/// shift_y / shift_z carry the terminal-shift offsets when a problem has been
/// rewritten with a shifted generator (empty otherwise).
struct ProcVals {
    double v = 0.0;
    double alpha_tilde = 0.0;
    double alpha_bar = 0.0;
    double alpha = 0.0;
    Eigen::VectorXd shift_y;
    Eigen::MatrixXd shift_z;
};

/// Sampling ranges for the parameter processes during classification. A
/// deterministic budget process (e.g. alpha_tilde identically 8) is the
/// degenerate range lo == hi; a stochastic one is sampled inside [lo, hi] and
/// the same draw feeds both the generator and the inequality budget.
struct ProcRange {
    double lo = 0.0;
    double hi = 0.0;
};

struct ProcBox {
    ProcRange v, alpha_tilde, alpha_bar, alpha;
};

using GeneratorFn = std::function<Eigen::VectorXd(
    double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const ProcVals& pv)>;

/// Pathwise parameter processes attached to a generator for solving; each is
/// optional (absent means identically zero). shift_y (dim n) and shift_z
/// (dim n*d) feed the terminal-shift offsets of a rewritten problem.
struct ParameterProcesses {
    std::shared_ptr<const PathProcess> v, alpha_tilde, alpha_bar, alpha;
    std::shared_ptr<const PathProcess> shift_y, shift_z;

    ProcVals at(int m, int k) const {
        ProcVals pv;
        if (v) pv.v = v->at(m, k, 0);
        if (alpha_tilde) pv.alpha_tilde = alpha_tilde->at(m, k, 0);
        if (alpha_bar) pv.alpha_bar = alpha_bar->at(m, k, 0);
        if (alpha) pv.alpha = alpha->at(m, k, 0);
        if (shift_y) {
            const int n = shift_y->dim;
            pv.shift_y.resize(n);
            for (int i = 0; i < n; ++i) pv.shift_y(i) = shift_y->at(m, k, i);
        }
        if (shift_z) {
            const int n = shift_y ? shift_y->dim : 1;
            const int d = shift_z->dim / n;
            pv.shift_z.resize(n, d);
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < d; ++c) pv.shift_z(i, c) = shift_z->at(m, k, i * d + c);
        }
        return pv;
    }
};

struct GeneratorSpec {
    std::string label;
    GeneratorFn eval;
    StructuralParams params;
    ProcBox proc_box;
    ParameterProcesses procs;

    /// evaluate with a hard error naming the component on non-finite output
    Eigen::VectorXd evaluate(double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& z,
                             const ProcVals& pv = {}) const;
};

/// The WLOG sign-flip reduction: components with flip[i] get
/// g_bar^i(t,y,z) := -g^i(t, y(-y^i;i), z(-z^i;i)) style orientation, so that
/// the flipped generator satisfies the one-sided cases directly. Applying the
/// reduction twice with the same mask returns the original evaluations.
GeneratorSpec flip_reduce(const GeneratorSpec& spec, const std::vector<bool>& flip);

// ---------------------------------------------------------------------------
// assumption classification
// ---------------------------------------------------------------------------

enum class CaseLabel { case_i, case_ii, case_iii, none };

const char* to_string(CaseLabel);

struct ComponentVerdict {
    CaseLabel label = CaseLabel::none;
    bool flipped = false;       // satisfied in the flipped orientation
    double margin = 0.0;          // worst slack over samples for the reported case
    double best_violation = 0.0;  // most negative margin seen among failed cases
};

struct PairVerdict {
    bool satisfied = false;
    double margin = 0.0;
};

struct SamplePlan {
    int count = 4096;
    double y_radius = 10.0;
    double z_radius = 10.0;
    double t_max = 1.0;
    std::uint64_t seed = 1;
};

struct ClassificationVerdict {
    std::vector<ComponentVerdict> b1, c1a, c1b, d1;
    PairVerdict b2, d2;
    std::optional<PairVerdict> ab;  // present when a spanning set was supplied
    std::vector<int> c1b_J1, c1b_J2, c1b_J3;  // resolved partition

    nlohmann::json to_json() const;
};

ClassificationVerdict classify_assumptions(const GeneratorSpec& spec, const SamplePlan& plan);

struct ABSpanSpec;

/// classify_assumptions plus the (AB) pair: the spanning test and the sampled
/// growth gate against the supplied vectors.
ClassificationVerdict classify_assumptions_with_ab(const GeneratorSpec& spec,
                                                   const SamplePlan& plan, const ABSpanSpec& ab);

// ---------------------------------------------------------------------------
// positively spanning sets (assumption (AB))
// ---------------------------------------------------------------------------

struct ABSpanSpec {
    std::vector<Eigen::VectorXd> vectors;  // a_1..a_K in R^n
    double gamma = 1.0;
    double alpha_tilde_bound = 0.0;
};

struct SpanWitness {
    bool positively_spans = false;
    // weights[j] expresses the j-th probe (+e_1..+e_n, -e_1..-e_n)
    std::vector<Eigen::VectorXd> weights;
    double worst_residual = 0.0;
};

SpanWitness check_ab_span(const ABSpanSpec& ab);

/// sampled check of (AB)(ii): a_k^T g <= alpha_tilde + gamma |a_k^T z|^2
PairVerdict check_ab_growth(const GeneratorSpec& spec, const ABSpanSpec& ab,
                            const SamplePlan& plan);

// ---------------------------------------------------------------------------
// inequality suites for the example systems
// ---------------------------------------------------------------------------

struct MarginPair {
    double lower = 0.0;  // middle - lower bound
    double upper = 0.0;  // upper bound - middle
};

MarginPair verify_inequality_2_5c(double theta2, double vartheta2, double l,
                                  const Eigen::RowVectorXd& z1, const Eigen::RowVectorXd& z2);

struct Params25d {
    double vartheta1 = 0.0, theta1 = 0.0;
    double vartheta2 = -1.0, theta2 = 1.0, l21 = 0.0, k2 = 0.0;
    double vartheta3 = -1.0, theta3 = -1.0, kappa3 = 1.0;
    double l31 = 0.0, l32 = 0.0, l33 = 0.0, k3 = 0.0;
};

MarginPair verify_delta_bounds_2_5d(const Params25d& p, const Eigen::MatrixXd& z);

// ---------------------------------------------------------------------------
// gallery
// ---------------------------------------------------------------------------

struct GalleryEntry {
    std::string label;
    std::string description;
};

std::vector<GalleryEntry> list_gallery();

/// Construct a fully parameterized built-in generator; overrides is a flat
/// JSON object of parameter overrides. Unknown labels throw.
GeneratorSpec gallery(const std::string& label, const nlohmann::json& overrides = {});

}  // namespace qbsde
