#include "qbsde/norms.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qbsde {

namespace {

void require_scalar(const PathProcess& proc, const char* op) {
    if (proc.dim != 1) throw std::invalid_argument(std::string(op) + ": scalar process required");
}

void require_interval(const PathProcess& proc, const Interval& iv) {
    if (iv.ka < 0 || iv.kb > proc.ens->grid.N || iv.ka >= iv.kb)
        throw std::invalid_argument("norm estimator: empty interval");
}

// running tail integrals int_{t_k}^{t_kb} proc ds for k = kb..ka, visiting a
// callback at each k with the per-path tails
template <typename F>
void walk_tails(const PathProcess& proc, const Interval& iv, F&& visit) {
    const int M = proc.paths();
    const double dt = proc.ens->grid.dt();
    Eigen::VectorXd tail = Eigen::VectorXd::Zero(M);
    visit(iv.kb, tail);
    for (int k = iv.kb - 1; k >= iv.ka; --k) {
        for (int m = 0; m < M; ++m) tail(m) += proc.at(m, k, 0) * dt;
        visit(k, tail);
    }
}

}  // namespace

double estimate_sup_norm(const PathProcess& proc, const Interval& iv) {
    require_interval(proc, iv);
    double sup = 0.0;
    for (int m = 0; m < proc.paths(); ++m)
        for (int k = iv.ka; k <= iv.kb; ++k) {
            double s = 0.0;
            for (int c = 0; c < proc.dim; ++c) {
                const double v = proc.at(m, k, c);
                s += v * v;
            }
            sup = std::max(sup, std::sqrt(s));
        }
    return sup;
}

double estimate_linf(const PathProcess& proc, const Interval& iv) {
    require_scalar(proc, "estimate_linf");
    require_interval(proc, iv);
    const double dt = proc.ens->grid.dt();
    double sup = 0.0;
    for (int m = 0; m < proc.paths(); ++m) {
        double total = 0.0;
        for (int k = iv.ka; k < iv.kb; ++k) total += proc.at(m, k, 0) * dt;
        sup = std::max(sup, std::abs(total));
    }
    return sup;
}

double estimate_minf(const PathProcess& proc, const Interval& iv, const NormOptions& opts) {
    require_scalar(proc, "estimate_minf");
    require_interval(proc, iv);
    const RegressOptions ropts{opts.basis_degree, opts.ridge};
    double sup = 0.0;
    walk_tails(proc, iv, [&](int k, const Eigen::VectorXd& tail) {
        ConditionalRegression reg(*proc.ens, k, ropts);
        const Eigen::VectorXd fitted = reg.fit(tail);
        sup = std::max(sup, fitted.maxCoeff());
    });
    return sup;
}

double estimate_bmo(const PathProcess& proc, const Interval& iv, const NormOptions& opts) {
    return std::sqrt(estimate_minf(squared_norm_process(proc), iv, opts));
}

std::vector<double> bmo_sq_profile(const PathProcess& proc, const Interval& iv,
                                   const NormOptions& opts) {
    const PathProcess sq = squared_norm_process(proc);
    require_interval(sq, iv);
    const RegressOptions ropts{opts.basis_degree, opts.ridge};
    std::vector<double> profile(iv.kb - iv.ka + 1, 0.0);
    walk_tails(sq, iv, [&](int k, const Eigen::VectorXd& tail) {
        ConditionalRegression reg(*sq.ens, k, ropts);
        profile[k - iv.ka] = reg.fit(tail).maxCoeff();
    });
    return profile;
}

EinfEstimate estimate_einf(const PathProcess& proc, double r, const Interval& iv,
                           const NormOptions& opts) {
    require_scalar(proc, "estimate_einf");
    require_interval(proc, iv);
    if (!(r > 0.0)) throw std::invalid_argument("estimate_einf: r must be > 0");
    const RegressOptions ropts{opts.basis_degree, opts.ridge};
    const int M = proc.paths();
    const double dt = proc.ens->grid.dt();

    // tower composition W_k = E_k[ W_{k+1} exp(r proc_k dt) ], W_kb = 1, with
    // the conditional-Jensen floor W_k >= exp(r E_k[tail_k]) applied pointwise;
    // the floor reuses the minf tail fit bitwise, so einf >= minf always
    EinfEstimate out;
    Eigen::VectorXd W = Eigen::VectorXd::Ones(M);
    Eigen::VectorXd tail = Eigen::VectorXd::Zero(M);
    double sup = 1.0;
    for (int k = iv.kb - 1; k >= iv.ka; --k) {
        Eigen::VectorXd y(M);
        for (int m = 0; m < M; ++m) {
            double e = r * proc.at(m, k, 0) * dt;
            if (e > opts.exp_cap) {
                out.overflow = true;
                e = opts.exp_cap;
            }
            y(m) = W(m) * std::exp(e);
            if (!std::isfinite(y(m))) {
                out.overflow = true;
                y(m) = std::exp(opts.exp_cap);
            }
        }
        for (int m = 0; m < M; ++m) tail(m) += proc.at(m, k, 0) * dt;
        ConditionalRegression reg(*proc.ens, k, ropts);
        W = reg.fit(y);
        const Eigen::VectorXd G = reg.fit(tail);
        for (int m = 0; m < M; ++m) {
            const double e = r * G(m);
            if (e > opts.exp_cap)
                out.overflow = true;
            else
                W(m) = std::max(W(m), std::exp(e));
        }
        sup = std::max(sup, W.maxCoeff());
        if (std::log(sup) > opts.exp_cap) out.overflow = true;
    }
    out.value = std::log(sup) / r;
    return out;
}

JohnNirenbergReport john_nirenberg_check(const PathProcess& Z, const Interval& iv,
                                         const NormOptions& opts, double slack) {
    JohnNirenbergReport rep;
    const double bmo = estimate_bmo(Z, iv, opts);
    rep.bmo_sq = bmo * bmo;
    const PathProcess sq = squared_norm_process(Z);
    const double dt = Z.ens->grid.dt();
    double mean = 0.0;
    bool overflow = false;
    for (int m = 0; m < Z.paths(); ++m) {
        double total = 0.0;
        for (int k = iv.ka; k < iv.kb; ++k) total += sq.at(m, k, 0) * dt;
        if (total > opts.exp_cap) {
            overflow = true;
            total = opts.exp_cap;
        }
        mean += std::exp(total);
    }
    rep.exp_moment = mean / Z.paths();
    if (rep.bmo_sq < 1.0 && !overflow) {
        rep.applicable = true;
        rep.bound = 1.0 / (1.0 - rep.bmo_sq);
        rep.satisfied = rep.exp_moment <= rep.bound * (1.0 + slack);
    }
    return rep;
}

NormReport estimate_norms(const PathProcess& proc, const Interval& iv,
                          const std::vector<double>& einf_rates, const NormOptions& opts) {
    NormReport rep;
    rep.sup_norm = estimate_sup_norm(proc, iv);
    rep.bmo = estimate_bmo(proc, iv, opts);
    if (proc.dim == 1) {
        rep.linf = estimate_linf(proc, iv);
        rep.minf = estimate_minf(proc, iv, opts);
        for (double r : einf_rates) {
            const EinfEstimate e = estimate_einf(proc, r, iv, opts);
            rep.einf[r] = e.value;
            rep.einf_overflow = rep.einf_overflow || e.overflow;
        }
    }
    rep.a = proc.ens->grid.t(iv.ka);
    rep.b = proc.ens->grid.t(iv.kb);
    rep.M = proc.paths();
    rep.N = proc.ens->grid.N;
    rep.basis_degree = opts.basis_degree;
    return rep;
}

nlohmann::json NormReport::to_json() const {
    nlohmann::json j;
    j["sup_norm"] = sup_norm;
    j["linf"] = linf;
    j["minf"] = minf;
    j["bmo"] = bmo;
    nlohmann::json je = nlohmann::json::object();
    for (const auto& [r, v] : einf) je[std::to_string(r)] = v;
    j["einf"] = je;
    j["einf_overflow"] = einf_overflow;
    j["interval"] = {a, b};
    j["M"] = M;
    j["N"] = N;
    j["basis_degree"] = basis_degree;
    return j;
}

}  // namespace qbsde
