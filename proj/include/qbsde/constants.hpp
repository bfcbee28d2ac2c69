#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nlohmann/json.hpp"
#include "qbsde/generators.hpp"

namespace qbsde {

/// Norm estimates feeding the constants engine.
struct NormInputs {
    double xi_sup = 0.0;           // ||xi||_inf
    double alpha_einf = 0.0;       // ||alpha||_{E-infinity(p gamma)} (or p gamma e^{beta T})
    double alpha_bar_minf = 0.0;   // ||alpha_bar||_{M-infinity}
    double alpha_tilde_linf = 0.0; // ||alpha_tilde||_{L-infinity}
    double v_bmo = 0.0;            // ||v||_BMO
};

struct LocalConstantsReport {
    double C_pnl = 0.0;   // the lambda/delta Young constant, with its trailing +1
    double C1 = 0.0;
    double C2 = 0.0;
    std::vector<double> C1_seq;  // C1^0 .. C1^n
    double K = 0.0;              // C1^n
    double eps_max = 0.0;
    double theta_max = 0.0;
    double q = 0.0;
    nlohmann::json inputs_echo;

    nlohmann::json to_json() const;
};

/// Every explicit constant of the local construction: the Young constant,
/// C1/C2, the recursion C1^i, K = C1^n, the admissible window length, and the
/// smallness gate on theta. Requires p > 1, or p = 1 with lambda = 0 (then
/// the Young constant's leading term is 0 and theta_max = 0).
LocalConstantsReport compute_local_constants(const StructuralParams& params,
                                             const NormInputs& norms, double T, double c0);

struct GlobalConstants41Report {
    double C_pnbglT = 0.0;  // n gamma p lambda^2 / (2(p-1)) * e^{beta T}
    double Cbar1 = 0.0, Cbar2 = 0.0, Cbar3 = 0.0, Cbar4 = 0.0;
    std::vector<double> Cbar5_seq;  // Cbar5^1 .. Cbar5^n
    std::vector<double> Cbar6_seq;  // Cbar6^1 .. Cbar6^{1+ceil(T/eps0)}
    double eps0 = 0.0;
    double K_tilde = 0.0;
    nlohmann::json inputs_echo;

    nlohmann::json to_json() const;
};

GlobalConstants41Report compute_global_constants_41(const StructuralParams& params,
                                                    const NormInputs& norms, double T, double c0);

/// The increasing function the pasting argument iterates; exposed so the
/// recursion below is testable with a stub.
std::function<double(double)> phi_function_41(const StructuralParams& params,
                                              const NormInputs& norms, double T, double c0);

/// Cbar6^1 = 2 Cbar1 Cbar5n, Cbar6^{m+1} = Cbar6^m + 2 Phi(Cbar6^m) Cbar5n.
std::vector<double> c6_sequence(const std::function<double(double)>& Phi, double Cbar1,
                                double Cbar5n, int count);

/// C1^0 = 0, C1^i = C1^{i-1} + C1 + C2 [C1^{i-1}]^{(1+delta)/(1-delta)}.
std::vector<double> c1_recursion(double C1, double C2, double delta, int n);

/// Cbar5^1 = 1, Cbar5^i = Cbar5^{i-1} + 1 + Cbar4 Cbar5^{i-1}.
std::vector<double> c5_sequence(double Cbar4, int n);

/// The admissible window length: min{T, 1/(1+phi(K))^2, ...}.
double eps_max_formula(const StructuralParams& params, double K, double C_pnl, double T);

struct GlobalConstants42cReport {
    double eps0 = 0.0;
    double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0, C5 = 0.0, C6 = 0.0, C7 = 0.0;
    double K_tilde = 0.0;
    nlohmann::json inputs_echo;

    nlohmann::json to_json() const;
};

struct Partition42c {
    int n1 = 0, n2 = 0, n3 = 0;
};

/// Gronwall-based sup bound chain. bounds.xi_sup plays C1 and
/// bounds.alpha_tilde_linf plays C2; empty-partition terms (1/n1) are
/// dropped when n1 = 0.
GlobalConstants42cReport compute_global_constants_42c(const StructuralParams& params,
                                                      const Partition42c& part,
                                                      const NormInputs& bounds, double T);

struct YoungReport {
    double worst_margin_38 = 0.0;    // pointwise Young bound behind the lambda |V|^{1+delta} split
    double worst_margin_425c = 0.0;  // a b^{1+delta} <= b^2 + ... bound
    int samples = 0;
};

YoungReport verify_young_inequalities(int samples, std::uint64_t seed);

}  // namespace qbsde
