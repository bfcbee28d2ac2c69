#include "qbsde/constants.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qbsde/rng.hpp"

namespace qbsde {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// lambda (1-delta)/2 (p n r lambda (1+delta)/(p-1))^{(1+delta)/(1-delta)},
// with the 0 convention for lambda = 0 (covers p = 1 as well)
double young_constant(double p, int n, double r, double lambda, double delta) {
    if (lambda == 0.0) return 0.0;
    const double expo = (1.0 + delta) / (1.0 - delta);
    return lambda * (1.0 - delta) / 2.0 *
           std::pow(p * n * r * lambda * (1.0 + delta) / (p - 1.0), expo);
}

nlohmann::json echo(const StructuralParams& P, const NormInputs& N, double T, double c0) {
    return {
        {"n", P.n}, {"gamma", P.gamma}, {"gamma_bar", P.gamma_bar}, {"lambda", P.lambda},
        {"lambda_bar", P.lambda_bar}, {"c", P.c}, {"c_bar", P.c_bar}, {"theta", P.theta},
        {"delta", P.delta}, {"beta", P.beta}, {"p", P.p}, {"T", T}, {"c0", c0},
        {"xi_sup", N.xi_sup}, {"alpha_einf", N.alpha_einf},
        {"alpha_bar_minf", N.alpha_bar_minf}, {"alpha_tilde_linf", N.alpha_tilde_linf},
        {"v_bmo", N.v_bmo}};
}

}  // namespace

LocalConstantsReport compute_local_constants(const StructuralParams& params,
                                             const NormInputs& norms, double T, double c0) {
    params.validate();
    if (params.p == 1.0 && params.lambda > 0.0)
        throw std::invalid_argument(
            "compute_local_constants: p = 1 is admissible only with lambda = 0");

    const int n = params.n;
    const double g = params.gamma, gb = params.gamma_bar, lam = params.lambda,
                 lb = params.lambda_bar, c = params.c, cb = params.c_bar, del = params.delta,
                 p = params.p;

    LocalConstantsReport rep;
    rep.C_pnl = young_constant(p, n, g, lam, del) + 1.0;

    const double expquad =
        std::exp(4.0 * g * (norms.xi_sup + norms.alpha_tilde_linf + 1.0));
    rep.C1 = (2.0 + gb) / gb *
                 (8.0 + std::log(2.0) / g + 3.0 * norms.xi_sup + norms.alpha_einf +
                  2.0 * norms.alpha_bar_minf + n * rep.C_pnl * T + 2.0 * n * cb) +
             4.0 * (g + 1.0) / (g * g) * expquad *
                 (5.0 + norms.alpha_tilde_linf + 3.0 * norms.v_bmo * norms.v_bmo +
                  3.0 * n * n * c * c) +
             1.0 +
             c0 * std::exp(2.0 * lb * lb * T) *
                 (54.0 + norms.xi_sup * norms.xi_sup +
                  6.0 * norms.alpha_bar_minf * norms.alpha_bar_minf + 6.0 * n * n * lb * lb * T);

    rep.C2 = (2.0 + gb) / gb * (2.0 * rep.C_pnl * T + 4.0 * cb) +
             12.0 * n * c * c * (g + 1.0) / (g * g) * expquad +
             12.0 * n * c0 * lb * lb * T * std::exp(2.0 * lb * lb * T);

    rep.C1_seq = c1_recursion(rep.C1, rep.C2, del, n);
    rep.K = rep.C1_seq.back();
    rep.eps_max = eps_max_formula(params, rep.K, rep.C_pnl, T);

    if (p > 1.0) {
        rep.q = p / (p - 1.0);
        rep.theta_max = 1.0 / (4.0 * n * std::max(rep.q * g, 1.0) * rep.K);
    } else {
        rep.q = 0.0;       // the p = 1 regime admits theta = 0 only
        rep.theta_max = 0.0;
    }
    rep.inputs_echo = echo(params, norms, T, c0);
    return rep;
}

std::function<double(double)> phi_function_41(const StructuralParams& params,
                                              const NormInputs& norms, double T, double c0) {
    const int n = params.n;
    const double g = params.gamma, gb = params.gamma_bar, lb = params.lambda_bar,
                 del = params.delta, b = params.beta, p = params.p;
    const double ebT = std::exp(b * T);
    const double base = norms.xi_sup + norms.alpha_tilde_linf;
    const double head = (2.0 * (1.0 + b * T) + gb) / gb * std::exp(2.0 * b * T);
    const double mid = 4.0 * (g + 1.0) / (g * g) * std::exp(4.0 * g * ebT * base);
    const double tail = c0 * std::exp(2.0 * b * T + 2.0 * lb * lb * T);
    const double alpha_einf = norms.alpha_einf;
    const double abar = norms.alpha_bar_minf;
    const double atil = norms.alpha_tilde_linf;
    const double vb = norms.v_bmo;
    (void)p;
    return [=](double x) {
        return head * (2.0 + 2.0 * n * lb * std::pow(T, (1.0 - del) / 2.0) +
                       std::log(2.0) / (g * ebT) + alpha_einf + 2.0 * abar + 3.0 * x) +
               mid * (b * T * ebT * base + 1.0 + atil + 2.0 * vb * vb) + 1.0 +
               tail * (6.0 + 6.0 * abar * abar + x * x);
    };
}

std::vector<double> c1_recursion(double C1, double C2, double delta, int n) {
    const double expo = (1.0 + delta) / (1.0 - delta);
    std::vector<double> seq(1, 0.0);
    for (int i = 1; i <= n; ++i) seq.push_back(seq.back() + C1 + C2 * std::pow(seq.back(), expo));
    return seq;
}

std::vector<double> c5_sequence(double Cbar4, int n) {
    std::vector<double> seq(1, 1.0);
    for (int i = 2; i <= n; ++i) seq.push_back(seq.back() + 1.0 + Cbar4 * seq.back());
    return seq;
}

double eps_max_formula(const StructuralParams& params, double K, double C_pnl, double T) {
    const int n = params.n;
    const double del = params.delta;
    const double lb = params.lambda_bar;
    const double expo = (1.0 + del) / (1.0 - del);
    const double phiK = params.phi(K);
    return std::min({T,
                     1.0 / ((1.0 + phiK) * (1.0 + phiK)),
                     1.0 / (n * C_pnl * std::pow(K, expo)),
                     std::pow(1.0 / (1.0 + 2.0 * n * lb * std::pow(K, (1.0 + del) / 2.0)),
                              2.0 / (1.0 - del)),
                     1.0 / (1.0 + n * n * lb * lb * K)});
}

std::vector<double> c6_sequence(const std::function<double(double)>& Phi, double Cbar1,
                                double Cbar5n, int count) {
    std::vector<double> seq;
    seq.push_back(2.0 * Cbar1 * Cbar5n);
    for (int m = 1; m < count; ++m) seq.push_back(seq.back() + 2.0 * Phi(seq.back()) * Cbar5n);
    return seq;
}

GlobalConstants41Report compute_global_constants_41(const StructuralParams& params,
                                                    const NormInputs& norms, double T, double c0) {
    params.validate();
    const int n = params.n;
    const double g = params.gamma, gb = params.gamma_bar, lam = params.lambda,
                 lb = params.lambda_bar, c = params.c, cb = params.c_bar, del = params.delta,
                 b = params.beta, p = params.p;
    if (p <= 1.0 && lam > 0.0)
        throw std::invalid_argument("compute_global_constants_41: p > 1 required when lambda > 0");

    GlobalConstants41Report rep;
    const double ebT = std::exp(b * T);
    rep.C_pnbglT = lam > 0.0 ? n * g * p * lam * lam / (2.0 * (p - 1.0)) * ebT : 0.0;

    const auto Phi = phi_function_41(params, norms, T, c0);
    rep.Cbar1 = Phi(norms.xi_sup);
    rep.Cbar2 = (6.0 * b * (1.0 + b * T) + 3.0 * b * gb) / gb * std::exp(2.0 * b * T);
    rep.Cbar3 = (2.0 * (1.0 + b * T) + gb) / gb * std::exp(2.0 * b * T) *
                    (rep.C_pnbglT + 2.0 * n * lb) +
                12.0 * n * c0 * lb * lb * T * std::exp(2.0 * b * T + 2.0 * lb * lb * T);
    const double base = norms.xi_sup + norms.alpha_tilde_linf;
    rep.Cbar4 = (4.0 * cb * (1.0 + b * T) + 2.0 * c * gb) / gb * std::exp(2.0 * b * T) +
                8.0 * n * c * c * (g + 1.0) / (g * g) * std::exp(4.0 * g * ebT * base);

    rep.Cbar5_seq = c5_sequence(rep.Cbar4, n);
    const double C5n = rep.Cbar5_seq.back();

    const double e1 = rep.Cbar2 > 0.0 ? 1.0 / (2.0 * rep.Cbar2 * C5n) : kInf;
    const double e2 = rep.Cbar3 > 0.0
                          ? std::pow(1.0 / (2.0 * rep.Cbar3 * C5n), 2.0 / (1.0 - del))
                          : kInf;
    rep.eps0 = std::min(e1, e2);

    const int count = std::isfinite(rep.eps0) ? 1 + static_cast<int>(std::ceil(T / rep.eps0)) : 1;
    rep.Cbar6_seq = c6_sequence(Phi, rep.Cbar1, C5n, count);
    rep.K_tilde = rep.Cbar6_seq.back();
    rep.inputs_echo = echo(params, norms, T, c0);
    return rep;
}

GlobalConstants42cReport compute_global_constants_42c(const StructuralParams& params,
                                                      const Partition42c& part,
                                                      const NormInputs& bounds, double T) {
    params.validate();
    if (part.n1 < 0 || part.n2 < 0 || part.n3 < 0 || part.n1 + part.n2 + part.n3 != params.n)
        throw std::invalid_argument("compute_global_constants_42c: partition must sum to n");

    const double g = params.gamma, gb = params.gamma_bar, lam = params.lambda,
                 del = params.delta, b = params.beta;
    const double n1 = part.n1, n2 = part.n2, n3 = part.n3;

    GlobalConstants42cReport rep;
    rep.C1 = bounds.xi_sup;
    rep.C2 = bounds.alpha_tilde_linf;
    rep.eps0 = std::min(gb / 9.0, g / 24.0);

    const double expo = (1.0 + del) / (1.0 - del);
    const double young = std::pow((1.0 + del) / 2.0, expo);
    if (part.n1 > 0) {
        rep.C3 = gb * rep.eps0 * (1.0 - del) / (8.0 * n1) * young *
                 std::pow(12.0 * n1 * lam / gb, 2.0 / (1.0 - del));
        rep.C4 = gb * rep.eps0 * (1.0 - del) / (4.0 * n1) * young *
                 std::pow(2.0 * n1 * n1 * lam * g / (gb * rep.eps0), 2.0 / (1.0 - del));
        rep.C5 = 2.0 * n1 * (rep.C1 + rep.C2) + 2.0 * rep.C4 * T / g +
                 (12.0 * rep.eps0 * rep.C2 + 4.0 * rep.C3 * T) / g;
    }

    rep.C6 = 2.0 * rep.C5 * rep.C5 + 2.0 * n2 * n2 * (rep.C1 + rep.C2) * (rep.C1 + rep.C2) +
             2.0 * rep.C1 * rep.C1 + 4.0 * n3 * rep.C2 * rep.C2;
    rep.C7 = (part.n1 > 0 ? 8.0 * b * b * T * (n1 + 1.0) * (n1 + 1.0) : 0.0) +
             2.0 * T * n2 * n2 * b * b + 4.0 * n3 * (b + n3 * lam * lam);
    rep.K_tilde = rep.C6 * std::exp(rep.C7 * T);
    rep.inputs_echo = {{"n1", part.n1}, {"n2", part.n2}, {"n3", part.n3},
                       {"beta", b},     {"gamma", g},    {"gamma_bar", gb},
                       {"lambda", lam}, {"delta", del},  {"T", T},
                       {"C1", rep.C1},  {"C2", rep.C2}};
    return rep;
}

YoungReport verify_young_inequalities(int samples, std::uint64_t seed) {
    YoungReport rep;
    rep.samples = samples;
    rep.worst_margin_38 = kInf;
    rep.worst_margin_425c = kInf;
    SampleRng rng(seed);
    for (int s = 0; s < samples; ++s) {
        // pointwise bound behind the lambda |V|^{1+delta} split:
        // lambda x^{1+d} <= (p-1) x^2 / (2 p n r m^2) + C m^{2(1+d)/(1-d)}
        {
            const double lam = rng.uniform(0.0, 5.0);
            const double del = rng.uniform(0.0, 0.9);
            const double p = 1.0 + rng.uniform(0.05, 9.0);
            const int n = rng.uniform_int(1, 8);
            const double r = rng.uniform(0.05, 5.0);
            const double x = rng.uniform(0.0, 10.0);
            const double m = rng.uniform(0.05, 10.0);
            const double C = young_constant(p, n, r, lam, del);
            const double lhs = lam * std::pow(x, 1.0 + del);
            const double rhs = (p - 1.0) * x * x / (2.0 * p * n * r * m * m) +
                               C * std::pow(m, 2.0 * (1.0 + del) / (1.0 - del));
            rep.worst_margin_38 = std::min(rep.worst_margin_38, rhs - lhs);
        }
        // a b^{1+delta} <= b^2 + (1-d)/2 ((1+d)/2)^{(1+d)/(1-d)} a^{2/(1-d)}
        {
            const double a = rng.uniform(0.0, 10.0);
            const double bb = rng.uniform(0.0, 10.0);
            const double del = rng.uniform(0.0, 0.9);
            const double lhs = a * std::pow(bb, 1.0 + del);
            const double rhs = bb * bb +
                               (1.0 - del) / 2.0 *
                                   std::pow((1.0 + del) / 2.0, (1.0 + del) / (1.0 - del)) *
                                   std::pow(a, 2.0 / (1.0 - del));
            rep.worst_margin_425c = std::min(rep.worst_margin_425c, rhs - lhs);
        }
    }
    return rep;
}

nlohmann::json LocalConstantsReport::to_json() const {
    return {{"C_pnl", C_pnl},     {"C1", C1},
            {"C2", C2},           {"C1_seq", C1_seq},
            {"K", K},             {"eps_max", eps_max},
            {"theta_max", theta_max}, {"q", q},
            {"inputs", inputs_echo}};
}

nlohmann::json GlobalConstants41Report::to_json() const {
    return {{"C_pnbglT", C_pnbglT}, {"Cbar1", Cbar1},   {"Cbar2", Cbar2},
            {"Cbar3", Cbar3},       {"Cbar4", Cbar4},   {"Cbar5_seq", Cbar5_seq},
            {"Cbar6_seq", Cbar6_seq}, {"eps0", eps0},   {"K_tilde", K_tilde},
            {"inputs", inputs_echo}};
}

nlohmann::json GlobalConstants42cReport::to_json() const {
    return {{"eps0", eps0}, {"C1", C1}, {"C2", C2}, {"C3", C3},     {"C4", C4},
            {"C5", C5},     {"C6", C6}, {"C7", C7}, {"K_tilde", K_tilde},
            {"inputs", inputs_echo}};
}

}  // namespace qbsde
