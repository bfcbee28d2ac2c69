#pragma once

#include <Eigen/Dense>

#include "qbsde/paths.hpp"

namespace qbsde {

struct RegressOptions {
    int basis_degree = 3;
    double ridge = 1e-8;
};

/// Least-squares conditional expectation on a monomial basis in B_{t_k}
/// (all monomials of total degree <= basis_degree). The normal equations are
/// ridge-damped on the non-intercept columns only, so constants are
/// reproduced exactly; fitted values are clamped to [min y, max y].
///
/// Factor once per time index, then fit any number of targets.
class ConditionalRegression {
  public:
    ConditionalRegression(const BrownianEnsemble& ens, int time_index, const RegressOptions& opts);

    Eigen::VectorXd fit(const Eigen::VectorXd& y) const;

    int basis_size() const { return static_cast<int>(design_.cols()); }

  private:
    Eigen::MatrixXd design_;
    Eigen::LDLT<Eigen::MatrixXd> solver_;
};

}  // namespace qbsde
