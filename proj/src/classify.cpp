#include <algorithm>
#include <cmath>
#include <set>

#include "qbsde/generators.hpp"
#include "qbsde/rng.hpp"

namespace qbsde {

const char* to_string(CaseLabel c) {
    switch (c) {
        case CaseLabel::case_i: return "i";
        case CaseLabel::case_ii: return "ii";
        case CaseLabel::case_iii: return "iii";
        default: return "none";
    }
}

namespace {

constexpr double kTol = 1e-12;

struct Sample {
    double t;
    Eigen::VectorXd y;
    Eigen::MatrixXd z;
    ProcVals pv;
};

ProcVals pv_at(const ProcBox& box, double u1, double u2, double u3, double u4) {
    ProcVals pv;
    pv.v = box.v.lo + (box.v.hi - box.v.lo) * u1;
    pv.alpha_tilde = box.alpha_tilde.lo + (box.alpha_tilde.hi - box.alpha_tilde.lo) * u2;
    pv.alpha_bar = box.alpha_bar.lo + (box.alpha_bar.hi - box.alpha_bar.lo) * u3;
    pv.alpha = box.alpha.lo + (box.alpha.hi - box.alpha.lo) * u4;
    return pv;
}

// deterministic probes: zero, axis rows at full radius, sign patterns, axis y
// values, each at both ends of the parameter-process box
std::vector<Sample> deterministic_probes(const GeneratorSpec& spec, const SamplePlan& plan) {
    const int n = spec.params.n;
    const int d = spec.params.d;
    std::vector<Sample> out;

    std::vector<Eigen::VectorXd> ys;
    ys.push_back(Eigen::VectorXd::Zero(n));
    for (int i = 0; i < n; ++i)
        for (double s : {1.0, -1.0}) {
            Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
            y(i) = s * plan.y_radius;
            ys.push_back(y);
        }
    ys.push_back(Eigen::VectorXd::Constant(n, plan.y_radius / std::sqrt(double(n))));

    std::vector<Eigen::MatrixXd> zs;
    zs.push_back(Eigen::MatrixXd::Zero(n, d));
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d; ++c)
            for (double s : {1.0, -1.0}) {
                Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, d);
                z(i, c) = s * plan.z_radius;
                zs.push_back(z);
            }
        Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, d);
        for (int c = 0; c < d; ++c) z(i, c) = plan.z_radius / std::sqrt(double(d));
        zs.push_back(z);
        for (int c = 0; c < d; ++c) z(i, c) = (c % 2 ? -1.0 : 1.0) * plan.z_radius / std::sqrt(double(d));
        zs.push_back(z);
    }

    for (const auto& y : ys)
        for (const auto& z : zs)
            for (double u : {0.0, 1.0})
                for (double t : {0.0, plan.t_max})
                    out.push_back(Sample{t, y, z, pv_at(spec.proc_box, u, u, u, u)});
    return out;
}

std::vector<Sample> build_samples(const GeneratorSpec& spec, const SamplePlan& plan) {
    const int n = spec.params.n;
    const int d = spec.params.d;
    std::vector<Sample> out = deterministic_probes(spec, plan);

    for (int s = 0; s < plan.count; ++s) {
        SampleRng rng(plan.seed, /*stream=*/static_cast<std::uint64_t>(s) + 10);
        Sample smp;
        smp.t = plan.t_max * rng.uniform();
        smp.y.resize(n);
        for (int i = 0; i < n; ++i) smp.y(i) = rng.uniform(-plan.y_radius, plan.y_radius);
        if (smp.y.norm() > plan.y_radius) smp.y *= plan.y_radius / smp.y.norm();
        smp.z.resize(n, d);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < d; ++c) smp.z(i, c) = rng.uniform(-plan.z_radius, plan.z_radius);
        if (s % 2 == 0) {
            if (smp.z.norm() > plan.z_radius) smp.z *= plan.z_radius / smp.z.norm();
        } else {
            double rmax = 0.0;
            for (int i = 0; i < n; ++i) rmax = std::max(rmax, smp.z.row(i).norm());
            if (rmax > plan.z_radius) smp.z *= plan.z_radius / rmax;
        }
        smp.pv = pv_at(spec.proc_box, rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
        out.push_back(std::move(smp));
    }
    return out;
}

double phi_of(const GeneratorSpec& spec, double x) { return spec.params.phi(x); }

// closed-branch indicator envelopes for the sign-dependent y terms: the upper
// bound takes its y^i >= 0 branch at y^i = 0, the lower bound its y^i <= 0
// branch (the boundary is dP x dt null)
double upper_y_envelope(const GeneratorSpec& spec, const Sample& s, int i, double lin_coeff,
                        double lin_value) {
    return s.y(i) >= 0.0 ? lin_coeff * lin_value : phi_of(spec, s.y.norm());
}
double lower_y_envelope(const GeneratorSpec& spec, const Sample& s, int i, double lin_coeff,
                        double lin_value) {
    return s.y(i) <= 0.0 ? lin_coeff * lin_value : phi_of(spec, s.y.norm());
}

struct CaseCheck {
    double margin = std::numeric_limits<double>::infinity();
    void feed(double m) { margin = std::min(margin, m); }
    bool ok() const { return margin >= -kTol; }
};

enum class Family { B1, C1a, C1b, D1 };

// orientation: 0 = f := g^i; 1 = negated (B1/D1: f := -g^i; C1a/C1b: the
// (y(-y^i;i), z(-z^i;i)) reflection)
double oriented_component(const GeneratorSpec& spec, Family fam, int i, int orient,
                          const Sample& s) {
    if (orient == 0) return spec.evaluate(s.t, s.y, s.z, s.pv)(i);
    if (fam == Family::B1 || fam == Family::D1)
        return -spec.evaluate(s.t, s.y, s.z, s.pv)(i);
    Eigen::VectorXd y = s.y;
    Eigen::MatrixXd z = s.z;
    y(i) = -y(i);
    z.row(i) = -z.row(i);
    return -spec.evaluate(s.t, y, z, s.pv)(i);
}

}  // namespace

ClassificationVerdict classify_assumptions(const GeneratorSpec& spec, const SamplePlan& plan) {
    spec.params.validate();
    const StructuralParams& P = spec.params;
    const int n = P.n;
    const std::vector<Sample> samples = build_samples(spec, plan);

    const auto row = [](const Eigen::MatrixXd& z, int j) { return z.row(j).norm(); };

    // ---- case margins ----------------------------------------------------

    // B1/C1a/D1 case (i): differ only in the y-budget and the upper cross sum
    const auto margin_case_i = [&](Family fam, int i, int orient) {
        CaseCheck chk;
        for (const auto& s : samples) {
            const double f = oriented_component(spec, fam, i, orient, s);
            const double zi2 = s.z.row(i).squaredNorm();
            double low_cross = 0.0;
            for (int j = i + 1; j < n; ++j)
                low_cross += P.lambda_bar * std::pow(row(s.z, j), 1.0 + P.delta) +
                             P.theta * s.z.row(j).squaredNorm();
            double low_tri = 0.0;
            for (int j = 0; j < i; ++j) low_tri += P.c_bar * s.z.row(j).squaredNorm();

            double low_y, up_y, up_alpha, low_alpha;
            if (fam == Family::B1) {
                low_y = phi_of(spec, s.y.norm());
                up_y = phi_of(spec, s.y.norm());
                up_alpha = s.pv.alpha;
                low_alpha = s.pv.alpha_bar;
            } else if (fam == Family::C1a) {
                low_y = P.beta * s.y.norm();
                up_y = upper_y_envelope(spec, s, i, P.beta, s.y.norm());
                up_alpha = s.pv.alpha;
                low_alpha = s.pv.alpha_bar;
            } else {  // D1
                low_y = P.beta * s.y.norm();
                up_y = P.beta * s.y.norm();
                up_alpha = s.pv.alpha;
                low_alpha = s.pv.alpha_bar;
            }

            double up_cross = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j == i) continue;
                double expo;
                if (fam == Family::B1)
                    expo = 1.0 + P.delta;
                else if (fam == Family::C1a)
                    expo = s.y(i) < 0.0 ? 1.0 + P.delta : 1.0;
                else
                    expo = 1.0;
                up_cross += P.lambda * std::pow(row(s.z, j), expo) +
                            P.theta * s.z.row(j).squaredNorm();
            }

            const double lower = 0.5 * P.gamma_bar * zi2 - low_alpha - low_y - low_cross - low_tri;
            const double upper = up_alpha + up_y + up_cross + 0.5 * P.gamma * zi2;
            chk.feed(f - lower);
            chk.feed(upper - f);
        }
        return chk;
    };

    // B1(ii) / B1(iii): symmetric absolute-value bounds
    const auto margin_b1_ii = [&](int i) {
        CaseCheck chk;
        for (const auto& s : samples) {
            const double g = spec.evaluate(s.t, s.y, s.z, s.pv)(i);
            const double phi = phi_of(spec, s.y.norm());
            double products = 0.0;
            for (int j = 0; j < i; ++j) products += std::abs(s.z.row(i).dot(s.z.row(j)));
            const double bound = s.pv.alpha_tilde + phi + (s.pv.v + phi) * row(s.z, i) +
                                 P.c * products + 0.5 * P.gamma * s.z.row(i).squaredNorm();
            chk.feed(bound - std::abs(g));
        }
        return chk;
    };
    const auto margin_b1_iii = [&](int i) {
        CaseCheck chk;
        for (const auto& s : samples) {
            const double g = spec.evaluate(s.t, s.y, s.z, s.pv)(i);
            double cross = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) cross += P.theta * s.z.row(j).squaredNorm();
            const double bound =
                s.pv.alpha_bar + phi_of(spec, s.y.norm()) + P.lambda_bar * s.z.norm() + cross;
            chk.feed(bound - std::abs(g));
        }
        return chk;
    };

    // sign-enveloped two-sided bounds shared by C1a(ii)/(iii), C1b(ii)/(iii),
    // with the z-budget supplied per case
    const auto margin_enveloped = [&](int i, bool own_y_component,
                                      const std::function<double(const Sample&)>& zbudget) {
        CaseCheck chk;
        for (const auto& s : samples) {
            const double g = spec.evaluate(s.t, s.y, s.z, s.pv)(i);
            const double ymag = own_y_component ? std::abs(s.y(i)) : s.y.norm();
            const double up = upper_y_envelope(spec, s, i, P.beta, ymag) + zbudget(s);
            const double lo = -(lower_y_envelope(spec, s, i, P.beta, ymag) + zbudget(s));
            chk.feed(up - g);
            chk.feed(g - lo);
        }
        return chk;
    };

    // D1(ii)/(iii): plain absolute-value bounds with beta |y^i|
    const auto margin_d1_ii = [&](int i) {
        CaseCheck chk;
        for (const auto& s : samples) {
            const double g = spec.evaluate(s.t, s.y, s.z, s.pv)(i);
            double tri = 0.0;
            for (int j = 0; j < i; ++j) tri += P.c * row(s.z, j);
            const double bound = s.pv.alpha_tilde + P.beta * std::abs(s.y(i)) +
                                 (s.pv.v + tri) * row(s.z, i) +
                                 0.5 * P.gamma * s.z.row(i).squaredNorm();
            chk.feed(bound - std::abs(g));
        }
        return chk;
    };
    const auto margin_d1_iii = [&](int i) {
        CaseCheck chk;
        for (const auto& s : samples) {
            const double g = spec.evaluate(s.t, s.y, s.z, s.pv)(i);
            double cross = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) cross += P.theta * s.z.row(j).squaredNorm();
            const double bound =
                s.pv.alpha_bar + P.beta * std::abs(s.y(i)) + P.lambda_bar * s.z.norm() + cross;
            chk.feed(bound - std::abs(g));
        }
        return chk;
    };

    // ---- per-family labeling ----------------------------------------------

    const auto label_component = [&](std::vector<std::pair<CaseLabel, CaseCheck>> cases,
                                     std::vector<bool> flips) {
        ComponentVerdict v;
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < cases.size(); ++k) {
            if (cases[k].second.ok()) {
                v.label = cases[k].first;
                v.flipped = flips[k];
                v.margin = cases[k].second.margin;
                return v;
            }
            worst = std::max(worst, cases[k].second.margin);
        }
        v.label = CaseLabel::none;
        v.best_violation = worst;
        return v;
    };

    ClassificationVerdict out;

    for (int i = 0; i < n; ++i) {
        out.b1.push_back(label_component(
            {{CaseLabel::case_i, margin_case_i(Family::B1, i, 0)},
             {CaseLabel::case_i, margin_case_i(Family::B1, i, 1)},
             {CaseLabel::case_ii, margin_b1_ii(i)},
             {CaseLabel::case_iii, margin_b1_iii(i)}},
            {false, true, false, false}));

        const auto c1a_ii_budget = [&](const Sample& s) {
            double products = 0.0;
            for (int j = 0; j < i; ++j) products += std::abs(s.z.row(i).dot(s.z.row(j)));
            return s.pv.alpha_tilde + s.pv.v * row(s.z, i) + P.c * products +
                   0.5 * P.gamma * s.z.row(i).squaredNorm();
        };
        const auto c1a_iii_budget = [&](const Sample& s) {
            double cross = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) cross += P.theta * s.z.row(j).squaredNorm();
            return s.pv.alpha_bar + P.lambda_bar * s.z.norm() + cross;
        };
        out.c1a.push_back(label_component(
            {{CaseLabel::case_i, margin_case_i(Family::C1a, i, 0)},
             {CaseLabel::case_i, margin_case_i(Family::C1a, i, 1)},
             {CaseLabel::case_ii, margin_enveloped(i, true, c1a_ii_budget)},
             {CaseLabel::case_iii, margin_enveloped(i, true, c1a_iii_budget)}},
            {false, true, false, false}));

        out.d1.push_back(label_component(
            {{CaseLabel::case_i, margin_case_i(Family::D1, i, 0)},
             {CaseLabel::case_i, margin_case_i(Family::D1, i, 1)},
             {CaseLabel::case_ii, margin_d1_ii(i)},
             {CaseLabel::case_iii, margin_d1_iii(i)}},
            {false, true, false, false}));
    }

    // ---- C1b with its J1/J2/J3 partition fixed point ----------------------

    std::set<int> J1, J3;
    for (int i = 0; i < n; ++i) {
        J1.insert(i);
        J3.insert(i);
    }
    out.c1b.assign(n, ComponentVerdict{});

    for (int sweep = 0; sweep <= n; ++sweep) {
        std::vector<ComponentVerdict> labels(n);
        for (int i = 0; i < n; ++i) {
            std::set<int> J1i = J1;
            J1i.insert(i);
            std::set<int> J3i = J3;
            J3i.insert(i);

            const auto c1b_i_margin = [&](int orient) {
                CaseCheck chk;
                for (const auto& s : samples) {
                    const double f = oriented_component(spec, Family::C1b, i, orient, s);
                    double cross = 0.0;  // own row excluded (no essential difference)
                    for (int j : J1i)
                        if (j != i) cross += P.lambda * std::pow(row(s.z, j), 1.0 + P.delta);
                    const double zi2 = s.z.row(i).squaredNorm();
                    const double lower = 0.5 * P.gamma_bar * zi2 - s.pv.alpha_tilde -
                                         P.beta * s.y.norm() - cross;
                    const double upper = s.pv.alpha_tilde +
                                         upper_y_envelope(spec, s, i, P.beta, s.y.norm()) + cross +
                                         0.5 * P.gamma * zi2;
                    chk.feed(f - lower);
                    chk.feed(upper - f);
                }
                return chk;
            };
            const auto c1b_ii_budget = [&](const Sample& s) {
                double products = 0.0;
                for (int j = 0; j < i; ++j) products += std::abs(s.z.row(i).dot(s.z.row(j)));
                return s.pv.alpha_tilde +
                       (s.pv.v + phi_of(spec, s.y.norm())) * row(s.z, i) + P.c * products +
                       0.5 * P.gamma * s.z.row(i).squaredNorm();
            };
            const auto c1b_iii_budget = [&](const Sample& s) {
                double lin = 0.0;
                for (int j : J3i) lin += P.lambda * row(s.z, j);
                return s.pv.alpha_tilde + lin;
            };

            labels[i] = label_component(
                {{CaseLabel::case_i, c1b_i_margin(0)},
                 {CaseLabel::case_i, c1b_i_margin(1)},
                 {CaseLabel::case_ii, margin_enveloped(i, false, c1b_ii_budget)},
                 {CaseLabel::case_iii, margin_enveloped(i, false, c1b_iii_budget)}},
                {false, true, false, false});
        }

        std::set<int> newJ1, newJ3;
        for (int i = 0; i < n; ++i) {
            if (labels[i].label == CaseLabel::case_i) newJ1.insert(i);
            if (labels[i].label == CaseLabel::case_iii) newJ3.insert(i);
        }
        out.c1b = labels;
        if (newJ1 == J1 && newJ3 == J3) break;
        J1 = newJ1;
        J3 = newJ3;
    }
    for (int i = 0; i < n; ++i) {
        switch (out.c1b[i].label) {
            case CaseLabel::case_i: out.c1b_J1.push_back(i + 1); break;
            case CaseLabel::case_ii: out.c1b_J2.push_back(i + 1); break;
            case CaseLabel::case_iii: out.c1b_J3.push_back(i + 1); break;
            default: break;
        }
    }

    // ---- B2 / D2 pair checks ----------------------------------------------

    const auto pair_margins = [&](bool d2) {
        PairVerdict verdict;
        verdict.margin = std::numeric_limits<double>::infinity();
        SampleRng rng(plan.seed, 99);
        const int n_pairs = plan.count;
        for (int s = 0; s <= n_pairs; ++s) {
            Sample a, b;
            a.t = b.t = plan.t_max * rng.uniform();
            a.y.resize(n);
            b.y.resize(n);
            for (int i = 0; i < n; ++i) {
                a.y(i) = rng.uniform(-plan.y_radius, plan.y_radius);
                b.y(i) = rng.uniform(-plan.y_radius, plan.y_radius);
            }
            a.z.resize(n, P.d);
            b.z.resize(n, P.d);
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < P.d; ++c) {
                    a.z(i, c) = rng.uniform(-plan.z_radius, plan.z_radius);
                    b.z(i, c) = rng.uniform(-plan.z_radius, plan.z_radius);
                }
            a.pv = b.pv =
                pv_at(spec.proc_box, rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
            if (s == n_pairs) b = a;  // coincident pair must give zero exactly

            const Eigen::VectorXd ga = spec.evaluate(a.t, a.y, a.z, a.pv);
            const Eigen::VectorXd gb = spec.evaluate(b.t, b.y, b.z, b.pv);
            const double zn = a.z.norm(), zbn = b.z.norm();
            const double dy = (a.y - b.y).norm();
            for (int i = 0; i < n; ++i) {
                double sum_low = 0.0, sum_high = 0.0;
                for (int j = 0; j <= i; ++j) sum_low += (a.z.row(j) - b.z.row(j)).norm();
                for (int j = i + 1; j < n; ++j) sum_high += (a.z.row(j) - b.z.row(j)).norm();
                double rhs;
                if (!d2) {
                    const double phi = phi_of(spec, std::max(a.y.norm(), b.y.norm()));
                    rhs = phi * ((std::pow(a.pv.v, 1.0 + P.delta) +
                                  std::pow(zn, 1.0 + P.delta) + std::pow(zbn, 1.0 + P.delta)) *
                                     dy +
                                 (a.pv.v + zn + zbn) * sum_low +
                                 ((std::pow(a.pv.v, P.delta) + std::pow(zn, P.delta) +
                                   std::pow(zbn, P.delta)) +
                                  P.theta * (a.pv.v + zn + zbn)) *
                                     sum_high);
                } else {
                    rhs = P.gamma * (a.pv.v + zn + zbn) * (dy + sum_low) +
                          ((P.gamma * (std::pow(a.pv.v, P.delta) + std::pow(zn, P.delta) +
                                       std::pow(zbn, P.delta))) +
                           P.theta * (a.pv.v + zn + zbn)) *
                              sum_high;
                }
                verdict.margin = std::min(verdict.margin, rhs - std::abs(ga(i) - gb(i)));
            }
        }
        verdict.satisfied = verdict.margin >= -kTol;
        return verdict;
    };

    out.b2 = pair_margins(false);
    out.d2 = pair_margins(true);
    return out;
}

ClassificationVerdict classify_assumptions_with_ab(const GeneratorSpec& spec,
                                                   const SamplePlan& plan, const ABSpanSpec& ab) {
    ClassificationVerdict out = classify_assumptions(spec, plan);
    PairVerdict verdict = check_ab_growth(spec, ab, plan);
    const SpanWitness span = check_ab_span(ab);
    verdict.satisfied = verdict.satisfied && span.positively_spans;
    out.ab = verdict;
    return out;
}

PairVerdict check_ab_growth(const GeneratorSpec& spec, const ABSpanSpec& ab,
                            const SamplePlan& plan) {
    PairVerdict verdict;
    verdict.margin = std::numeric_limits<double>::infinity();
    const std::vector<Sample> samples = build_samples(spec, plan);
    for (const auto& s : samples) {
        const Eigen::VectorXd g = spec.evaluate(s.t, s.y, s.z, s.pv);
        for (const auto& a : ab.vectors) {
            const double lhs = a.dot(g);
            const double akz = (a.transpose() * s.z).norm();
            const double rhs = s.pv.alpha_tilde + ab.gamma * akz * akz;
            verdict.margin = std::min(verdict.margin, rhs - lhs);
        }
    }
    verdict.satisfied = verdict.margin >= -kTol;
    return verdict;
}

nlohmann::json ClassificationVerdict::to_json() const {
    nlohmann::json j;
    const auto dump = [](const std::vector<ComponentVerdict>& v) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& c : v)
            arr.push_back({{"case", to_string(c.label)},
                           {"flipped", c.flipped},
                           {"margin", c.margin},
                           {"best_violation", c.best_violation}});
        return arr;
    };
    j["B1"] = dump(b1);
    j["C1a"] = dump(c1a);
    j["C1b"] = dump(c1b);
    j["D1"] = dump(d1);
    j["B2"] = {{"satisfied", b2.satisfied}, {"margin", b2.margin}};
    j["D2"] = {{"satisfied", d2.satisfied}, {"margin", d2.margin}};
    if (ab) j["AB"] = {{"satisfied", ab->satisfied}, {"margin", ab->margin}};
    j["C1b_partition"] = {{"J1", c1b_J1}, {"J2", c1b_J2}, {"J3", c1b_J3}};
    return j;
}

}  // namespace qbsde
