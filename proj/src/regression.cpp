#include "qbsde/regression.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace qbsde {

namespace {

// exponent tuples of total degree <= degree over d variables, graded order
void enumerate_monomials(int d, int degree, std::vector<int>& current,
                         std::vector<std::vector<int>>& out, int remaining, int pos) {
    if (pos == d) {
        out.push_back(current);
        return;
    }
    for (int e = 0; e <= remaining; ++e) {
        current[pos] = e;
        enumerate_monomials(d, degree, current, out, remaining - e, pos + 1);
    }
    current[pos] = 0;
}

}  // namespace

ConditionalRegression::ConditionalRegression(const BrownianEnsemble& ens, int time_index,
                                             const RegressOptions& opts) {
    const int M = ens.M;
    const int d = ens.d;
    if (time_index < 0 || time_index > ens.grid.N)
        throw std::invalid_argument("ConditionalRegression: time index out of range");

    std::vector<std::vector<int>> monos;
    std::vector<int> cur(d, 0);
    enumerate_monomials(d, opts.basis_degree, cur, monos, opts.basis_degree, 0);

    const int B = static_cast<int>(monos.size());
    // per-variable power tables, then monomials as products
    std::vector<Eigen::MatrixXd> powers(d);
    for (int j = 0; j < d; ++j) {
        powers[j].resize(M, opts.basis_degree + 1);
        powers[j].col(0).setOnes();
        for (int e = 1; e <= opts.basis_degree; ++e)
            for (int m = 0; m < M; ++m)
                powers[j](m, e) = powers[j](m, e - 1) * ens.b(m, time_index, j);
    }
    design_.resize(M, B);
    for (int b = 0; b < B; ++b) {
        design_.col(b).setOnes();
        for (int j = 0; j < d; ++j)
            if (monos[b][j] > 0)
                design_.col(b).array() *= powers[j].col(monos[b][j]).array();
    }

    // standardize non-intercept columns; degenerate columns zeroed so the
    // ridge term keeps the system definite
    const Eigen::RowVectorXd col_mean = design_.colwise().mean();
    for (int b = 1; b < B; ++b) {
        design_.col(b).array() -= col_mean(b);
        const double sd = std::sqrt(design_.col(b).squaredNorm() / M);
        if (sd > 1e-300)
            design_.col(b) /= sd;
        else
            design_.col(b).setZero();
    }

    Eigen::MatrixXd gram = design_.transpose() * design_;
    for (int b = 1; b < B; ++b) gram(b, b) += opts.ridge;
    solver_.compute(gram);
    if (solver_.info() != Eigen::Success)
        throw std::runtime_error("ConditionalRegression: singular design");
}

Eigen::VectorXd ConditionalRegression::fit(const Eigen::VectorXd& y) const {
    if (y.size() != design_.rows())
        throw std::invalid_argument("ConditionalRegression: target size mismatch");
    const Eigen::VectorXd beta = solver_.solve(design_.transpose() * y);
    Eigen::VectorXd fitted = design_ * beta;
    // a conditional expectation never leaves the range of its target
    const double lo = y.minCoeff();
    const double hi = y.maxCoeff();
    for (Eigen::Index i = 0; i < fitted.size(); ++i) fitted(i) = std::clamp(fitted(i), lo, hi);
    return fitted;
}

}  // namespace qbsde
