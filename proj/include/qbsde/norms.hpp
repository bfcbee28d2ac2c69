#pragma once

#include <map>
#include <vector>

#include "nlohmann/json.hpp"
#include "qbsde/regression.hpp"

namespace qbsde {

struct NormOptions {
    int basis_degree = 3;
    double ridge = 1e-8;
    double exp_cap = 700.0;  // exponent cap before overflow flagging
};

/// sup over paths and grid times in [a,b] of the pointwise Euclidean norm.
double estimate_sup_norm(const PathProcess& proc, const Interval& iv);

/// ||int_a^b proc ds||_inf: pathwise max of the total left-endpoint integral
/// (scalar nonnegative processes).
double estimate_linf(const PathProcess& proc, const Interval& iv);

/// sup over grid times t_k in [a,b] and paths of the regression-estimated
/// E_k[ int_{t_k}^b proc ds ] (scalar nonnegative processes).
double estimate_minf(const PathProcess& proc, const Interval& iv, const NormOptions& opts = {});

/// Discrete BMO estimator: sqrt of estimate_minf(|proc|^2). Shares the
/// regression engine bitwise with estimate_minf.
double estimate_bmo(const PathProcess& proc, const Interval& iv, const NormOptions& opts = {});

struct EinfEstimate {
    double value = 0.0;
    bool overflow = false;
};

/// (1/r) ln sup_{k,paths} E_k[ exp( r int_{t_k}^b proc ds ) ].
EinfEstimate estimate_einf(const PathProcess& proc, double r, const Interval& iv,
                           const NormOptions& opts = {});

/// Per-time-index sup profile of the bmo^2 tail estimates (diagnostic).
std::vector<double> bmo_sq_profile(const PathProcess& proc, const Interval& iv,
                                   const NormOptions& opts = {});

struct JohnNirenbergReport {
    double bmo_sq = 0.0;
    double exp_moment = 0.0;
    double bound = 0.0;
    bool applicable = false;  // requires bmo^2 < 1
    bool satisfied = false;
};

JohnNirenbergReport john_nirenberg_check(const PathProcess& Z, const Interval& iv,
                                         const NormOptions& opts = {}, double slack = 0.05);

struct NormReport {
    double sup_norm = 0.0;
    double linf = 0.0;
    double minf = 0.0;
    double bmo = 0.0;
    std::map<double, double> einf;  // rate -> estimate
    bool einf_overflow = false;
    double a = 0.0, b = 0.0;
    int M = 0, N = 0;
    int basis_degree = 0;

    nlohmann::json to_json() const;
};

NormReport estimate_norms(const PathProcess& proc, const Interval& iv,
                          const std::vector<double>& einf_rates, const NormOptions& opts = {});

}  // namespace qbsde
