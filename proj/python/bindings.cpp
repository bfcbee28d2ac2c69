#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qbsde/constants.hpp"
#include "qbsde/norms.hpp"
#include "qbsde/runner.hpp"
#include "qbsde/system.hpp"
#include "qbsde/transforms.hpp"

namespace py = pybind11;
using namespace qbsde;

namespace {

PathProcess process_from_array(const BrownianEnsemble& ens,
                               const py::array_t<double, py::array::c_style>& values) {
    const auto buf = values.request();
    if (buf.ndim != 3 || buf.shape[0] != ens.M || buf.shape[1] != ens.grid.N + 1)
        throw std::invalid_argument("values must have shape (M, N+1, dim)");
    PathProcess p(ens, static_cast<int>(buf.shape[2]));
    std::memcpy(p.values.data(), buf.ptr, sizeof(double) * p.values.size());
    return p;
}

py::array_t<double> array_from_process(const PathProcess& p) {
    py::array_t<double> out({p.paths(), p.times(), p.dim});
    std::memcpy(out.mutable_data(), p.values.data(), sizeof(double) * p.values.size());
    return out;
}

nlohmann::json json_from_pystr(const std::string& s) { return nlohmann::json::parse(s); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "quadratic BSDE laboratory (C++ core)";
    m.attr("__version__") = kArtifactVersion;

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, int>(), py::arg("T"), py::arg("N"))
        .def_readonly("T", &TimeGrid::T)
        .def_readonly("N", &TimeGrid::N)
        .def("dt", &TimeGrid::dt)
        .def("t", &TimeGrid::t);

    py::class_<BrownianEnsemble>(m, "BrownianEnsemble")
        .def_readonly("d", &BrownianEnsemble::d)
        .def_readonly("M", &BrownianEnsemble::M)
        .def_readonly("seed", &BrownianEnsemble::seed)
        .def_property_readonly("grid", [](const BrownianEnsemble& e) { return e.grid; })
        .def("increments",
             [](const BrownianEnsemble& e) {
                 py::array_t<double> out({e.M, e.grid.N, e.d});
                 std::memcpy(out.mutable_data(), e.increments.data(),
                             sizeof(double) * e.increments.size());
                 return out;
             })
        .def("brownian", [](const BrownianEnsemble& e) {
            py::array_t<double> out({e.M, e.grid.N + 1, e.d});
            std::memcpy(out.mutable_data(), e.bvalues.data(),
                        sizeof(double) * e.bvalues.size());
            return out;
        });

    m.def("generate_paths", &generate_paths, py::arg("seed"), py::arg("M"), py::arg("grid"),
          py::arg("d"));

    m.def(
        "ito_integral",
        [](const BrownianEnsemble& ens, const py::array_t<double, py::array::c_style>& z) {
            return array_from_process(ito_integral(process_from_array(ens, z), ens));
        },
        py::arg("ensemble"), py::arg("integrand"));
    m.def(
        "time_integral",
        [](const BrownianEnsemble& ens, const py::array_t<double, py::array::c_style>& f) {
            return array_from_process(time_integral(process_from_array(ens, f), ens));
        },
        py::arg("ensemble"), py::arg("integrand"));

    m.def(
        "estimate_norms",
        [](const BrownianEnsemble& ens, const py::array_t<double, py::array::c_style>& proc,
           const std::vector<double>& rates, int basis_degree) {
            NormOptions opts;
            opts.basis_degree = basis_degree;
            const auto rep = estimate_norms(process_from_array(ens, proc),
                                            full_interval(ens.grid), rates, opts);
            return rep.to_json().dump();
        },
        py::arg("ensemble"), py::arg("process"), py::arg("einf_rates") = std::vector<double>{1.0},
        py::arg("basis_degree") = 3);

    m.def(
        "john_nirenberg_check",
        [](const BrownianEnsemble& ens, const py::array_t<double, py::array::c_style>& z) {
            const auto rep = john_nirenberg_check(process_from_array(ens, z),
                                                  full_interval(ens.grid));
            py::dict out;
            out["bmo_sq"] = rep.bmo_sq;
            out["exp_moment"] = rep.exp_moment;
            out["bound"] = rep.bound;
            out["applicable"] = rep.applicable;
            out["satisfied"] = rep.satisfied;
            return out;
        },
        py::arg("ensemble"), py::arg("z"));

    m.def("exp_transform_oracle", &exp_transform_oracle, py::arg("gamma"), py::arg("terminal"),
          py::arg("exp_cap") = 700.0);

    m.def(
        "solve_quadratic_1d",
        [](const BrownianEnsemble& ens, const Eigen::VectorXd& terminal, double gamma,
           int basis_degree) {
            ScalarBSDEProblem prob;
            prob.ens = &ens;
            prob.window = full_interval(ens.grid);
            prob.terminal = terminal;
            prob.terminal_bound = terminal.cwiseAbs().maxCoeff();
            prob.generator = [gamma](int, int, double, double, const Eigen::RowVectorXd& z) {
                return 0.5 * gamma * z.squaredNorm();
            };
            Scalar1dOptions opts;
            opts.basis_degree = basis_degree;
            const auto sol = solve_1d(prob, opts);
            py::dict out;
            out["Y"] = array_from_process(sol.Y);
            out["Z"] = array_from_process(sol.Z);
            out["residual_rms"] = sol.residual_rms;
            out["sup_Y"] = sol.sup_Y;
            out["bmo_Z"] = sol.bmo_Z;
            return out;
        },
        py::arg("ensemble"), py::arg("terminal"), py::arg("gamma") = 1.0,
        py::arg("basis_degree") = 3);

    m.def("list_gallery", [] {
        py::list out;
        for (const auto& e : list_gallery()) {
            py::dict row;
            row["label"] = e.label;
            row["description"] = e.description;
            out.append(row);
        }
        return out;
    });

    m.def(
        "solve_system",
        [](const BrownianEnsemble& ens, const std::string& label, const std::string& overrides,
           const Eigen::MatrixXd& terminal, double window, int max_outer_iters,
           double distance_tol) {
            SystemProblem prob;
            prob.ens = &ens;
            prob.window = full_interval(ens.grid);
            prob.spec = gallery(label, json_from_pystr(overrides));
            prob.terminal = terminal;
            prob.terminal_bound = 0.0;
            for (int m2 = 0; m2 < terminal.rows(); ++m2)
                prob.terminal_bound = std::max(prob.terminal_bound, terminal.row(m2).norm());
            SystemSolveOptions opts;
            opts.max_outer_iters = max_outer_iters;
            opts.distance_tol = distance_tol;
            const auto sol = window > 0.0 ? paste_intervals(prob, window, opts)
                                          : picard_solve(prob, opts);
            const Eigen::VectorXd rms = residual_check(sol, prob);
            py::dict out;
            out["Y"] = array_from_process(sol.Y);
            out["Z"] = array_from_process(sol.Z);
            out["converged"] = sol.converged;
            out["diverged"] = sol.diverged;
            out["distance_log"] = sol.distance_log;
            out["contraction_ratios"] = sol.contraction_ratios;
            out["residual_rms"] = std::vector<double>(rms.data(), rms.data() + rms.size());
            out["sup_Y"] = sol.sup_Y;
            out["bmo2_Z"] = sol.bmo2_Z;
            return out;
        },
        py::arg("ensemble"), py::arg("label"), py::arg("overrides") = std::string("{}"),
        py::arg("terminal"), py::arg("window") = 0.0, py::arg("max_outer_iters") = 25,
        py::arg("distance_tol") = 1e-3);

    m.def(
        "classify",
        [](const std::string& label, const std::string& overrides, int count, double y_radius,
           double z_radius, std::uint64_t seed) {
            SamplePlan plan;
            plan.count = count;
            plan.y_radius = y_radius;
            plan.z_radius = z_radius;
            plan.seed = seed;
            return classify_assumptions(gallery(label, json_from_pystr(overrides)), plan)
                .to_json()
                .dump();
        },
        py::arg("label"), py::arg("overrides") = std::string("{}"), py::arg("count") = 4096,
        py::arg("y_radius") = 10.0, py::arg("z_radius") = 10.0, py::arg("seed") = 1);

    m.def(
        "local_constants",
        [](const std::string& params_json, const std::string& norms_json, double T, double c0) {
            const auto pj = json_from_pystr(params_json);
            StructuralParams p;
            p.n = pj.value("n", 1);
            p.gamma = pj.value("gamma", 2.0);
            p.gamma_bar = pj.value("gamma_bar", 1.0);
            p.lambda = pj.value("lambda", 0.0);
            p.lambda_bar = pj.value("lambda_bar", 0.0);
            p.c = pj.value("c", 0.0);
            p.c_bar = pj.value("c_bar", 0.0);
            p.theta = pj.value("theta", 0.0);
            p.delta = pj.value("delta", 0.0);
            p.beta = pj.value("beta", 0.0);
            p.p = pj.value("p", 2.0);
            const auto nj = json_from_pystr(norms_json);
            NormInputs in;
            in.xi_sup = nj.value("xi_sup", 0.0);
            in.alpha_einf = nj.value("alpha_einf", 0.0);
            in.alpha_bar_minf = nj.value("alpha_bar_minf", 0.0);
            in.alpha_tilde_linf = nj.value("alpha_tilde_linf", 0.0);
            in.v_bmo = nj.value("v_bmo", 0.0);
            return compute_local_constants(p, in, T, c0).to_json().dump();
        },
        py::arg("params") = std::string("{}"), py::arg("norm_inputs") = std::string("{}"),
        py::arg("T") = 1.0, py::arg("c0") = 2.0);

    m.def("check_thm_2_12d", [](double t1, double v1, double t2, double v2) {
        const auto v = check_thm_2_12d(t1, v1, t2, v2);
        py::dict out;
        out["nonsolvable"] = v.nonsolvable;
        out["scaling"] = Eigen::MatrixXd(v.scaling);
        out["coefficients"] = py::make_tuple(v.coeff1, v.coeff2);
        out["check_error"] = v.check_error;
        return out;
    });
    m.def("check_cor_2_15b", &check_cor_2_15b, py::arg("alpha"), py::arg("beta"));
    m.def("matrix_first_row", &matrix_first_row, py::arg("b"));
    m.def("matrix_shear", &matrix_shear, py::arg("a"), py::arg("b"));
    m.def(
        "verify_young_inequalities",
        [](int samples, std::uint64_t seed) {
            const auto rep = verify_young_inequalities(samples, seed);
            return py::make_tuple(rep.worst_margin_38, rep.worst_margin_425c);
        },
        py::arg("samples") = 10000, py::arg("seed") = 1);

    m.def(
        "run_experiment",
        [](const std::string& config_json, const std::string& out_dir, bool quiet) {
            return run_experiment(json_from_pystr(config_json), out_dir, quiet).dump();
        },
        py::arg("config"), py::arg("out_dir"), py::arg("quiet") = true);
}
