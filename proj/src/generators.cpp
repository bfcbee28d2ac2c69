#include "qbsde/generators.hpp"

#include <cmath>
#include <stdexcept>

namespace qbsde {

void StructuralParams::validate() const {
    if (n < 1 || d < 1) throw std::invalid_argument("StructuralParams: n, d must be >= 1");
    if (!(gamma_bar > 0.0) || !(gamma_bar <= gamma))
        throw std::invalid_argument("StructuralParams: need 0 < gamma_bar <= gamma");
    if (!(delta >= 0.0 && delta < 1.0))
        throw std::invalid_argument("StructuralParams: delta must lie in [0,1)");
    if (lambda < 0 || lambda_bar < 0 || c < 0 || c_bar < 0 || theta < 0 || beta < 0)
        throw std::invalid_argument("StructuralParams: constants must be >= 0");
    if (!(p >= 1.0)) throw std::invalid_argument("StructuralParams: p must be >= 1");
    if (p == 1.0 && lambda > 0.0)
        throw std::invalid_argument("StructuralParams: p = 1 requires lambda = 0");
}

Eigen::VectorXd GeneratorSpec::evaluate(double t, const Eigen::VectorXd& y,
                                        const Eigen::MatrixXd& z, const ProcVals& pv) const {
    Eigen::VectorXd out = eval(t, y, z, pv);
    if (out.size() != params.n)
        throw std::runtime_error("generator '" + label + "': wrong output dimension");
    for (int i = 0; i < out.size(); ++i)
        if (!std::isfinite(out(i)))
            throw std::runtime_error("generator '" + label + "': non-finite output in component " +
                                     std::to_string(i + 1));
    return out;
}

GeneratorSpec flip_reduce(const GeneratorSpec& spec, const std::vector<bool>& flip) {
    if (static_cast<int>(flip.size()) != spec.params.n)
        throw std::invalid_argument("flip_reduce: mask size mismatch");
    GeneratorSpec out = spec;
    out.label = spec.label + "#flipped";
    GeneratorFn inner = spec.eval;
    std::vector<bool> mask = flip;
    out.eval = [inner, mask](double t, const Eigen::VectorXd& y, const Eigen::MatrixXd& z,
                             const ProcVals& pv) {
        Eigen::VectorXd yb = y;
        Eigen::MatrixXd zb = z;
        for (int i = 0; i < y.size(); ++i)
            if (mask[i]) {
                yb(i) = -y(i);
                zb.row(i) = -z.row(i);
            }
        Eigen::VectorXd g = inner(t, yb, zb, pv);
        for (int i = 0; i < g.size(); ++i)
            if (mask[i]) g(i) = -g(i);
        return g;
    };
    return out;
}

MarginPair verify_inequality_2_5c(double theta2, double vartheta2, double l,
                                  const Eigen::RowVectorXd& z1, const Eigen::RowVectorXd& z2) {
    if (!(theta2 > 0.0) || !(vartheta2 < 0.0))
        throw std::invalid_argument("verify_inequality_2_5c: need theta2 > 0 and vartheta2 < 0");
    const double q1 = z1.squaredNorm();
    const double q2 = z2.squaredNorm();
    const double cross = z1.dot(z2);
    const double middle = vartheta2 * q1 + theta2 * q2 + l * cross;
    const double lower = 0.5 * theta2 * q2 - (0.5 * l * l / theta2 - vartheta2) * q1;
    const double upper = (theta2 - 0.5 * l * l / vartheta2) * q2;
    return MarginPair{middle - lower, upper - middle};
}

MarginPair verify_delta_bounds_2_5d(const Params25d& p, const Eigen::MatrixXd& z) {
    if (!(p.theta2 > 0.0 && p.vartheta2 < 0.0))
        throw std::invalid_argument("verify_delta_bounds_2_5d: need theta2 > 0, vartheta2 < 0");
    if (!(p.kappa3 > 0.0 && p.theta3 < 0.0 && p.vartheta3 < 0.0))
        throw std::invalid_argument(
            "verify_delta_bounds_2_5d: need kappa3 > 0, theta3 < 0, vartheta3 < 0");
    if (!(p.l33 * p.l33 < 4.0 * p.theta3 * p.vartheta3))
        throw std::invalid_argument("verify_delta_bounds_2_5d: need l33^2 < 4 theta3 vartheta3");
    if (z.rows() != 3) throw std::invalid_argument("verify_delta_bounds_2_5d: z must be 3 x d");

    // unique eps in (0,1] with l33^2 = 4 (1-eps)^2 theta3 vartheta3
    const double eps = 1.0 - std::abs(p.l33) / (2.0 * std::sqrt(p.theta3 * p.vartheta3));

    const double q1 = z.row(0).squaredNorm();
    const double q2 = z.row(1).squaredNorm();
    const double q3 = z.row(2).squaredNorm();
    const double c31 = z.row(2).dot(z.row(0));
    const double c32 = z.row(2).dot(z.row(1));
    const double c12 = z.row(0).dot(z.row(1));

    const double delta_s = p.vartheta3 * q1 + p.theta3 * q2 + p.kappa3 * q3 + p.l31 * c31 +
                           p.l32 * c32 + p.l33 * c12;

    const double upper =
        (p.kappa3 - p.l31 * p.l31 / (4.0 * eps * p.vartheta3) -
         p.l32 * p.l32 / (4.0 * eps * p.theta3)) *
        q3;
    const double lower = 0.5 * p.kappa3 * q3 -
                         (0.5 + p.l31 * p.l31 / p.kappa3 - p.vartheta3) * q1 -
                         (0.5 * p.l33 * p.l33 + p.l32 * p.l32 / p.kappa3 - p.theta3) * q2;
    return MarginPair{delta_s - lower, upper - delta_s};
}

// ---------------------------------------------------------------------------
// positively spanning check via nonnegative least squares
// ---------------------------------------------------------------------------

namespace {

// Lawson-Hanson active-set NNLS; sizes here are tiny (n <= a few dozen)
Eigen::VectorXd nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double tol = 1e-12) {
    const int n = static_cast<int>(A.cols());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    std::vector<bool> passive(n, false);
    Eigen::VectorXd w = A.transpose() * (b - A * x);

    for (int iter = 0; iter < 30 * n; ++iter) {
        int best = -1;
        double bestw = tol;
        for (int j = 0; j < n; ++j)
            if (!passive[j] && w(j) > bestw) {
                bestw = w(j);
                best = j;
            }
        if (best < 0) break;
        passive[best] = true;

        while (true) {
            std::vector<int> idx;
            for (int j = 0; j < n; ++j)
                if (passive[j]) idx.push_back(j);
            Eigen::MatrixXd Ap(A.rows(), idx.size());
            for (std::size_t j = 0; j < idx.size(); ++j) Ap.col(j) = A.col(idx[j]);
            const Eigen::VectorXd zp =
                Ap.colPivHouseholderQr().solve(b);
            bool feasible = true;
            double alpha = 1.0;
            for (std::size_t j = 0; j < idx.size(); ++j)
                if (zp(j) <= tol) {
                    feasible = false;
                    const double xj = x(idx[j]);
                    if (xj - zp(j) > 0) alpha = std::min(alpha, xj / (xj - zp(j)));
                }
            if (feasible) {
                x.setZero();
                for (std::size_t j = 0; j < idx.size(); ++j) x(idx[j]) = zp(j);
                break;
            }
            for (std::size_t j = 0; j < idx.size(); ++j)
                x(idx[j]) = x(idx[j]) + alpha * (zp(j) - x(idx[j]));
            for (int j = 0; j < n; ++j)
                if (passive[j] && x(j) <= tol) {
                    passive[j] = false;
                    x(j) = 0.0;
                }
        }
        w = A.transpose() * (b - A * x);
    }
    return x;
}

}  // namespace

SpanWitness check_ab_span(const ABSpanSpec& ab) {
    if (ab.vectors.empty()) throw std::invalid_argument("check_ab_span: no vectors");
    const int n = static_cast<int>(ab.vectors.front().size());
    const int K = static_cast<int>(ab.vectors.size());
    if (K < n + 1)
        throw std::invalid_argument("check_ab_span: need at least n+1 candidate vectors");
    Eigen::MatrixXd A(n, K);
    for (int k = 0; k < K; ++k) {
        if (ab.vectors[k].size() != n)
            throw std::invalid_argument("check_ab_span: inconsistent vector dimensions");
        if (ab.vectors[k].norm() < 1e-14)
            throw std::invalid_argument("check_ab_span: zero vector rejected");
        A.col(k) = ab.vectors[k];
    }

    SpanWitness out;
    out.positively_spans = true;
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd target = Eigen::VectorXd::Zero(n);
            target(i) = s == 0 ? 1.0 : -1.0;
            Eigen::VectorXd lam = nnls(A, target);
            const double res = (A * lam - target).norm();
            out.worst_residual = std::max(out.worst_residual, res);
            out.weights.push_back(lam);
            if (res > 1e-9) out.positively_spans = false;
        }
    return out;
}

}  // namespace qbsde
