#include <cmath>
#include <stdexcept>

#include "qbsde/generators.hpp"

namespace qbsde {

namespace {

double get_or(const nlohmann::json& j, const char* key, double fallback) {
    if (j.contains(key)) return j.at(key).get<double>();
    return fallback;
}

int get_or_int(const nlohmann::json& j, const char* key, int fallback) {
    if (j.contains(key)) return j.at(key).get<int>();
    return fallback;
}

// Two-dimensional pair with diagonally quadratic rows:
//   g^1 = theta1 |z^1|^2 + vartheta1 |z^2|^2
//   g^2 = vartheta2 |z^1|^2 + theta2 |z^2|^2
GeneratorSpec make_2_4b(const nlohmann::json& o) {
    const double th1 = get_or(o, "theta1", 1.0);
    const double vt1 = get_or(o, "vartheta1", 0.01);
    const double th2 = get_or(o, "theta2", 1.0);
    const double vt2 = get_or(o, "vartheta2", 0.01);
    const int d = get_or_int(o, "d", 1);

    GeneratorSpec spec;
    spec.label = "(2.4b)";
    spec.params.n = 2;
    spec.params.d = d;
    const double q = std::max({std::abs(th1), std::abs(th2), 1.0});
    spec.params.gamma = 2.0 * q;
    spec.params.gamma_bar = std::min({std::abs(th1) > 0 ? 2.0 * std::abs(th1) : 2.0 * q,
                                      std::abs(th2) > 0 ? 2.0 * std::abs(th2) : 2.0 * q});
    spec.params.theta = std::max(std::abs(vt1), std::abs(vt2));
    spec.eval = [th1, vt1, th2, vt2](double, const Eigen::VectorXd&, const Eigen::MatrixXd& z,
                                     const ProcVals&) {
        Eigen::VectorXd g(2);
        const double q1 = z.row(0).squaredNorm();
        const double q2 = z.row(1).squaredNorm();
        g(0) = th1 * q1 + vt1 * q2;
        g(1) = vt2 * q1 + th2 * q2;
        return g;
    };
    return spec;
}

// Variant with a linear cross term and the z^1 (z^2)^T coupling:
//   g^1 = theta1 |z^1|^2 + vartheta1 |z^2|
//   g^2 = vartheta2 |z^1|^2 + theta2 |z^2|^2 + l z^1 (z^2)^T
GeneratorSpec make_2_5b(const nlohmann::json& o) {
    const double th1 = get_or(o, "theta1", 1.0);
    const double vt1 = get_or(o, "vartheta1", 0.1);
    const double th2 = get_or(o, "theta2", 1.0);
    const double vt2 = get_or(o, "vartheta2", -1.0);
    const double l = get_or(o, "l", 1.0);
    const int d = get_or_int(o, "d", 1);

    GeneratorSpec spec;
    spec.label = "(2.5b)";
    spec.params.n = 2;
    spec.params.d = d;
    spec.params.gamma = 2.0 * std::max({std::abs(th1), std::abs(th2) + 0.5 * l * l, 1.0});
    spec.params.gamma_bar = 1.0;
    spec.params.lambda = std::abs(vt1);
    spec.eval = [th1, vt1, th2, vt2, l](double, const Eigen::VectorXd&, const Eigen::MatrixXd& z,
                                        const ProcVals&) {
        Eigen::VectorXd g(2);
        g(0) = th1 * z.row(0).squaredNorm() + vt1 * z.row(1).norm();
        g(1) = vt2 * z.row(0).squaredNorm() + th2 * z.row(1).squaredNorm() +
               l * z.row(0).dot(z.row(1));
        return g;
    };
    return spec;
}

// Three-dimensional variant with triangular interaction terms.
GeneratorSpec make_2_5d(const nlohmann::json& o) {
    Params25d p;
    p.vartheta1 = get_or(o, "vartheta1", 0.5);
    p.theta1 = get_or(o, "theta1", 1.0);
    p.vartheta2 = get_or(o, "vartheta2", -1.0);
    p.theta2 = get_or(o, "theta2", 1.0);
    p.l21 = get_or(o, "l21", 0.5);
    p.k2 = get_or(o, "k2", 1.0);
    p.vartheta3 = get_or(o, "vartheta3", -1.0);
    p.theta3 = get_or(o, "theta3", -1.0);
    p.kappa3 = get_or(o, "kappa3", 1.0);
    p.l31 = get_or(o, "l31", 0.25);
    p.l32 = get_or(o, "l32", 0.25);
    p.l33 = get_or(o, "l33", 1.0);
    p.k3 = get_or(o, "k3", 1.0);
    const int d = get_or_int(o, "d", 1);

    GeneratorSpec spec;
    spec.label = "(2.5d)";
    spec.params.n = 3;
    spec.params.d = d;
    spec.params.gamma = 2.0 * std::max({std::abs(p.vartheta1), std::abs(p.theta2), p.kappa3, 1.0}) +
                        2.0 * (std::abs(p.l21) + std::abs(p.l31) + std::abs(p.l32) + std::abs(p.l33));
    spec.params.gamma_bar = 1.0;
    spec.params.lambda = std::max({std::abs(p.theta1), std::abs(p.k2), std::abs(p.k3)});
    spec.eval = [p](double, const Eigen::VectorXd&, const Eigen::MatrixXd& z, const ProcVals&) {
        Eigen::VectorXd g(3);
        const double q1 = z.row(0).squaredNorm();
        const double q2 = z.row(1).squaredNorm();
        const double q3 = z.row(2).squaredNorm();
        g(0) = p.vartheta1 * q1 + p.theta1 * z.row(2).norm();
        g(1) = p.vartheta2 * q1 + p.theta2 * q2 + p.l21 * z.row(1).dot(z.row(0)) +
               p.k2 * z.row(2).norm();
        g(2) = p.vartheta3 * q1 + p.theta3 * q2 + p.kappa3 * q3 +
               p.l31 * z.row(2).dot(z.row(0)) + p.l32 * z.row(2).dot(z.row(1)) +
               p.l33 * z.row(0).dot(z.row(1)) + p.k3 * z.row(1).norm();
        return g;
    };
    return spec;
}

// Alternating-sign diagonally quadratic family with a Lipschitz tail:
//   g^i = alpha_tilde_t + (-1)^i ( sum_{j<i} a_ij |z^j|^2 - a_ii |z^i|^2
//          + sum_{j>i} a_ij |z^j|^{1+delta} ) + h_scale sin(y^i)
GeneratorSpec make_2_7i(const nlohmann::json& o) {
    const int n = get_or_int(o, "n", 3);
    const int d = get_or_int(o, "d", 1);
    const double a = get_or(o, "a", 1.0);  // common positive matrix entry
    const double delta = get_or(o, "delta", 0.5);
    const double h_scale = get_or(o, "h_scale", 0.0);

    GeneratorSpec spec;
    spec.label = "ex2.7(i)";
    spec.params.n = n;
    spec.params.d = d;
    spec.params.gamma = 2.0 * a;
    spec.params.gamma_bar = 2.0 * a;
    spec.params.delta = delta;
    spec.params.lambda_bar = a;
    spec.params.c_bar = a;
    spec.params.beta = 1.0 + h_scale;
    spec.params.phi = [a](double x) { return (1.0 + 2.0 * a) * (1.0 + x); };
    spec.proc_box.alpha_tilde = {0.0, 2.0};
    spec.proc_box.alpha = {2.0 + h_scale, 2.0 + h_scale};
    spec.proc_box.alpha_bar = {2.0 + h_scale, 2.0 + h_scale};
    spec.proc_box.v = {1.0, 1.0};
    spec.eval = [n, a, delta, h_scale](double, const Eigen::VectorXd& y, const Eigen::MatrixXd& z,
                                       const ProcVals& pv) {
        Eigen::VectorXd g(n);
        for (int i = 0; i < n; ++i) {
            double inner = -a * z.row(i).squaredNorm();
            for (int j = 0; j < i; ++j) inner += a * z.row(j).squaredNorm();
            for (int j = i + 1; j < n; ++j) inner += a * std::pow(z.row(j).norm(), 1.0 + delta);
            const double sign = (i + 1) % 2 == 0 ? 1.0 : -1.0;  // (-1)^i with 1-based i
            g(i) = pv.alpha_tilde + sign * inner + h_scale * std::sin(y(i));
        }
        return g;
    };
    return spec;
}

// Backward stochastic Burgers system: n = d, g(y, z) = z y.
GeneratorSpec make_burgers(const nlohmann::json& o) {
    const int n = get_or_int(o, "n", 2);

    GeneratorSpec spec;
    spec.label = "burgers";
    spec.params.n = n;
    spec.params.d = n;
    spec.params.gamma = 2.0;
    spec.params.gamma_bar = 1.0;
    spec.params.lambda = 1.0;
    spec.params.beta = 1.0;
    spec.params.c = 1.0;
    spec.params.phi = [](double x) { return 1.0 + x; };
    spec.proc_box.alpha_tilde = {1.0, 1.0};
    spec.proc_box.alpha = {1.0, 1.0};
    spec.proc_box.alpha_bar = {1.0, 1.0};
    spec.proc_box.v = {1.0, 1.0};
    spec.eval = [](double, const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const ProcVals&) {
        return Eigen::VectorXd(z * y);
    };
    return spec;
}

// Triangular interacting family with exponential y growth:
//   g^i = alpha_tilde_t + (v_t + e^{|y|}) |z^i| + e^{-y_i} |z^i|^{3/2}
//          + z^i sum_{j<=i} c_ij (z^j)^T
GeneratorSpec make_2_7iii(const nlohmann::json& o) {
    const int n = get_or_int(o, "n", 2);
    const int d = get_or_int(o, "d", 2);
    const double cij = get_or(o, "c", 1.0);

    GeneratorSpec spec;
    spec.label = "ex2.7(iii)";
    spec.params.n = n;
    spec.params.d = d;
    spec.params.gamma = 2.0 * std::abs(cij) + 3.0;
    spec.params.gamma_bar = 1.0;
    spec.params.c = std::abs(cij) + 1.0;
    spec.params.beta = 1.0;
    spec.params.phi = [](double x) { return 3.0 * std::exp(2.0 * x) + 10.0 * (1.0 + x); };
    spec.proc_box.alpha_tilde = {0.0, 2.0};
    spec.proc_box.alpha = {2.0, 2.0};
    spec.proc_box.alpha_bar = {2.0, 2.0};
    spec.proc_box.v = {1.0, 1.0};
    spec.eval = [n, cij](double, const Eigen::VectorXd& y, const Eigen::MatrixXd& z,
                         const ProcVals& pv) {
        Eigen::VectorXd g(n);
        const double ey = std::exp(y.norm());
        for (int i = 0; i < n; ++i) {
            double products = 0.0;
            for (int j = 0; j <= i; ++j) products += cij * z.row(i).dot(z.row(j));
            g(i) = pv.alpha_tilde + (pv.v + ey) * z.row(i).norm() +
                   std::exp(-y(i)) * std::pow(z.row(i).norm(), 1.5) + products;
        }
        return g;
    };
    return spec;
}

// Five-dimensional showcase with d = 2 mixing all three C1b cases.
GeneratorSpec make_2_7iv(const nlohmann::json&) {
    GeneratorSpec spec;
    spec.label = "ex2.7(iv)";
    spec.params.n = 5;
    spec.params.d = 2;
    spec.params.gamma = 4.0;
    spec.params.gamma_bar = 1.0;
    spec.params.lambda = 3.0;
    spec.params.delta = 1.0 / 3.0;
    spec.params.beta = 8.0;
    spec.params.c = 4.0;
    spec.params.phi = [](double x) { return std::exp(x) + 10.0 * (1.0 + x); };
    spec.proc_box.alpha_tilde = {8.0, 8.0};
    spec.proc_box.alpha = {8.0, 8.0};
    spec.proc_box.alpha_bar = {8.0, 8.0};
    spec.proc_box.v = {1.0, 1.0};
    spec.eval = [](double, const Eigen::VectorXd& y, const Eigen::MatrixXd& z, const ProcVals&) {
        Eigen::Matrix2d A;
        A << 1, 1, 0, 0;
        const double ny = y.norm();
        const auto clip1 = [](double x) { return std::min(x, 1.0); };
        Eigen::VectorXd g(5);
        g(0) = std::exp(-y(0)) - ny + z.row(0).squaredNorm() -
               std::pow(z.row(1).norm(), 4.0 / 3.0) + std::sin(z.row(2).norm());
        g(1) = ny * std::cos(ny) - z.row(1).squaredNorm() + std::pow(z.row(0).norm(), 1.25) -
               std::cos(z.row(3).norm());
        g(2) = ny + z.row(2).dot(2.0 * z.row(0) - 3.0 * z.row(1)) +
               z.row(2) * A * z.row(2).transpose() - std::asin(clip1(z.row(4).norm()));
        g(3) = 2.0 * ny * std::sin(ny) + z.row(3).norm() - z.row(4).norm() +
               std::acos(clip1(z.row(0).norm()));
        g(4) = y(0) + 3.0 * y(2) - y(3) + y(4) - z.row(3).norm() + 2.0 * z.row(4).norm() -
               std::atan(z.row(1).norm());
        return g;
    };
    return spec;
}

// The non-solvable pair of the literature: g = (0, vt2 |z^1|^2 + th2 |z^2|^2)
// with th2*vt2 > 0. The sequential map degenerates on the triangular form, so
// the default presentation is rotated through an invertible matrix (the
// transformed system is solvable iff the original is); pass rotated = false
// for the plain form.
GeneratorSpec make_frei_dosreis(const nlohmann::json& o) {
    const double th2 = get_or(o, "theta2", 0.5);
    const double vt2 = get_or(o, "vartheta2", 1.0);
    const bool rotated = o.contains("rotated") ? o.at("rotated").get<bool>() : true;
    const int d = get_or_int(o, "d", 1);

    GeneratorSpec spec;
    spec.label = "frei-dosreis";
    spec.params.n = 2;
    spec.params.d = d;
    spec.params.gamma = 2.0 * std::max({std::abs(th2), std::abs(vt2), 1.0});
    spec.params.gamma_bar = 1.0;
    if (!rotated) {
        spec.eval = [th2, vt2](double, const Eigen::VectorXd&, const Eigen::MatrixXd& z,
                               const ProcVals&) {
            Eigen::VectorXd g(2);
            g(0) = 0.0;
            g(1) = vt2 * z.row(0).squaredNorm() + th2 * z.row(1).squaredNorm();
            return g;
        };
        return spec;
    }
    Eigen::Matrix2d A;
    A << 1, 1, -1, 1;
    const Eigen::Matrix2d Ainv = A.inverse();
    spec.eval = [th2, vt2, A, Ainv](double, const Eigen::VectorXd&, const Eigen::MatrixXd& zbar,
                                    const ProcVals&) {
        const Eigen::MatrixXd z = Ainv * zbar;
        Eigen::Vector2d g0(0.0, vt2 * z.row(0).squaredNorm() + th2 * z.row(1).squaredNorm());
        return Eigen::VectorXd(A * g0);
    };
    return spec;
}

}  // namespace

std::vector<GalleryEntry> list_gallery() {
    return {
        {"(2.4b)", "two diagonally quadratic components, cross |z|^2 couplings"},
        {"(2.5b)", "quadratic pair with z^1 (z^2)^T interaction, theta2*vartheta2 < 0"},
        {"(2.5d)", "three components with triangular quadratic interactions"},
        {"burgers", "backward stochastic Burgers system g(y,z) = z y (n = d)"},
        {"ex2.7(i)", "alternating-sign diagonally quadratic family with Lipschitz tail"},
        {"ex2.7(iii)", "triangular interacting family with exponential y growth"},
        {"ex2.7(iv)", "five components, d = 2, mixing all three one-sided growth cases"},
        {"frei-dosreis", "non-solvable pair (rotated presentation; rotated=false for plain)"},
    };
}

GeneratorSpec gallery(const std::string& label, const nlohmann::json& overrides) {
    if (label == "(2.4b)") return make_2_4b(overrides);
    if (label == "(2.5b)") return make_2_5b(overrides);
    if (label == "(2.5d)") return make_2_5d(overrides);
    if (label == "ex2.7(i)") return make_2_7i(overrides);
    if (label == "burgers" || label == "ex2.7(ii)") return make_burgers(overrides);
    if (label == "ex2.7(iii)") return make_2_7iii(overrides);
    if (label == "ex2.7(iv)") return make_2_7iv(overrides);
    if (label == "frei-dosreis") return make_frei_dosreis(overrides);
    throw std::invalid_argument("gallery: unknown label '" + label + "'");
}

}  // namespace qbsde
