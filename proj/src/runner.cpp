#include "qbsde/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include "qbsde/constants.hpp"
#include "qbsde/norms.hpp"
#include "qbsde/system.hpp"
#include "qbsde/transforms.hpp"

namespace qbsde {
namespace {

// the admissible window length and the theta smallness gate of the local
// construction, evaluated from the problem's own structural parameters and
// terminal bound (parameter-process norms taken as zero); reported next to a
// user-chosen pasting window so runs outside the sufficient regime are visible
nlohmann::json formula_gates(const GeneratorSpec& spec, double xi_bound, double T) {
    try {
        NormInputs in;
        in.xi_sup = xi_bound;
        const auto rep = compute_local_constants(spec.params, in, T, 2.0);
        return {{"eps_max", rep.eps_max},
                {"theta", spec.params.theta},
                {"theta_max", rep.theta_max},
                {"theta_within_gate", spec.params.theta <= rep.theta_max}};
    } catch (const std::exception& e) {
        return {{"unavailable", e.what()}};
    }
}

}  // namespace
}  // namespace qbsde

namespace qbsde {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": object expected");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    for (const auto& key : required)
        if (!obj.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
}

TimeGrid parse_grid(const json& j) {
    require_keys(j, {"T", "N"}, {"T", "N"}, "grid");
    return TimeGrid(j.at("T").get<double>(), j.at("N").get<int>());
}

StructuralParams parse_params(const json& j) {
    require_keys(j,
                 {"n", "d", "gamma", "gamma_bar", "lambda", "lambda_bar", "c", "c_bar", "theta",
                  "delta", "beta", "p", "phi_scale", "phi_power"},
                 {}, "params");
    StructuralParams p;
    if (j.contains("n")) p.n = j.at("n").get<int>();
    if (j.contains("d")) p.d = j.at("d").get<int>();
    if (j.contains("gamma")) p.gamma = j.at("gamma").get<double>();
    if (j.contains("gamma_bar")) p.gamma_bar = j.at("gamma_bar").get<double>();
    if (j.contains("lambda")) p.lambda = j.at("lambda").get<double>();
    if (j.contains("lambda_bar")) p.lambda_bar = j.at("lambda_bar").get<double>();
    if (j.contains("c")) p.c = j.at("c").get<double>();
    if (j.contains("c_bar")) p.c_bar = j.at("c_bar").get<double>();
    if (j.contains("theta")) p.theta = j.at("theta").get<double>();
    if (j.contains("delta")) p.delta = j.at("delta").get<double>();
    if (j.contains("beta")) p.beta = j.at("beta").get<double>();
    if (j.contains("p")) p.p = j.at("p").get<double>();
    const double scale = j.value("phi_scale", 0.0);
    const double power = j.value("phi_power", 1.0);
    p.phi = [scale, power](double x) { return scale * (1.0 + std::pow(x, power)); };
    return p;
}

NormInputs parse_norm_inputs(const json& j) {
    require_keys(j, {"xi_sup", "alpha_einf", "alpha_bar_minf", "alpha_tilde_linf", "v_bmo"}, {},
                 "norm_inputs");
    NormInputs n;
    n.xi_sup = j.value("xi_sup", 0.0);
    n.alpha_einf = j.value("alpha_einf", 0.0);
    n.alpha_bar_minf = j.value("alpha_bar_minf", 0.0);
    n.alpha_tilde_linf = j.value("alpha_tilde_linf", 0.0);
    n.v_bmo = j.value("v_bmo", 0.0);
    return n;
}

GeneratorSpec parse_generator(const json& j) {
    require_keys(j, {"label", "overrides"}, {"label"}, "generator");
    try {
        return gallery(j.at("label").get<std::string>(), j.value("overrides", json::object()));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("generator: ") + e.what());
    }
}

Eigen::MatrixXd build_terminal(const json& j, const BrownianEnsemble& ens, int n,
                               double& bound_out) {
    require_keys(j, {"type", "scale", "wavenumber", "values"}, {"type"}, "terminal");
    const std::string type = j.at("type").get<std::string>();
    Eigen::MatrixXd xi(ens.M, n);
    if (type == "constant") {
        const auto vals = j.at("values").get<std::vector<double>>();
        if (static_cast<int>(vals.size()) != n)
            throw ConfigError("terminal: values must have n entries");
        for (int m = 0; m < ens.M; ++m)
            for (int i = 0; i < n; ++i) xi(m, i) = vals[i];
    } else if (type == "bounded_sin") {
        const double scale = j.value("scale", 0.5);
        const double wave = j.value("wavenumber", 1.0);
        for (int m = 0; m < ens.M; ++m)
            for (int i = 0; i < n; ++i)
                xi(m, i) = scale * std::sin(wave * ens.b(m, ens.grid.N, i % ens.d) + i);
    } else {
        throw ConfigError("terminal: unknown type '" + type + "'");
    }
    bound_out = 0.0;
    for (int m = 0; m < ens.M; ++m) bound_out = std::max(bound_out, xi.row(m).norm());
    return xi;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// ---- experiment bodies -----------------------------------------------------

json run_solve(const json& cfg, const std::filesystem::path& out_dir, json& manifest) {
    require_keys(cfg,
                 {"kind", "seed", "grid", "ensemble", "generator", "terminal", "solver",
                  "out_dir"},
                 {"kind", "seed", "grid", "ensemble", "generator", "terminal"}, "config");
    const json solver = cfg.value("solver", json::object());
    require_keys(solver,
                 {"basis_degree", "picard_iters", "tolerance", "z_radius", "max_outer_iters",
                  "distance_tol", "window"},
                 {}, "solver");
    const json ens_cfg = cfg.at("ensemble");
    require_keys(ens_cfg, {"M"}, {"M"}, "ensemble");

    const TimeGrid grid = parse_grid(cfg.at("grid"));
    GeneratorSpec spec = parse_generator(cfg.at("generator"));
    const BrownianEnsemble ens =
        generate_paths(cfg.at("seed").get<std::uint64_t>(), ens_cfg.at("M").get<int>(), grid,
                       spec.params.d);

    SystemProblem problem;
    problem.ens = &ens;
    problem.window = full_interval(grid);
    problem.spec = spec;
    problem.terminal = build_terminal(cfg.at("terminal"), ens, spec.params.n,
                                      problem.terminal_bound);

    SystemSolveOptions opts;
    opts.scalar.basis_degree = solver.value("basis_degree", 3);
    opts.scalar.picard_iters = solver.value("picard_iters", 20);
    opts.scalar.tolerance = solver.value("tolerance", 1e-10);
    opts.scalar.z_radius = solver.value("z_radius", 50.0);
    opts.max_outer_iters = solver.value("max_outer_iters", 25);
    opts.distance_tol = solver.value("distance_tol", 1e-3);
    const double window = solver.value("window", 0.0);

    SystemSolution sol = window > 0.0 ? paste_intervals(problem, window, opts)
                                      : picard_solve(problem, opts);
    const Eigen::VectorXd rms = residual_check(sol, problem);

    json result;
    result["window"] = {{"requested", window}};
    result["sufficient_gates"] = formula_gates(spec, problem.terminal_bound, grid.T);
    result["converged"] = sol.converged;
    result["diverged"] = sol.diverged;
    result["distance_log"] = sol.distance_log;
    result["contraction_ratios"] = sol.contraction_ratios;
    result["sup_Y"] = sol.sup_Y;
    result["bmo2_Z"] = sol.bmo2_Z;
    result["residual_rms"] = std::vector<double>(rms.data(), rms.data() + rms.size());
    result["row_provenance"] = sol.row_provenance;
    json windows = json::array();
    for (const auto& w : sol.windows)
        windows.push_back({{"index", w.index},
                           {"converged", w.converged},
                           {"iterations", w.iterations},
                           {"sup_Y", w.sup_Y},
                           {"bmo2_Z", w.bmo2_Z}});
    result["windows"] = windows;

    // time series: t, then mean and sup|.| of every component
    const int n = spec.params.n;
    std::string csv = "t";
    for (int i = 0; i < n; ++i)
        csv += ",mean_Y" + std::to_string(i + 1) + ",sup_absY" + std::to_string(i + 1);
    csv += "\r\n";
    for (int k = 0; k <= grid.N; ++k) {
        csv += csv_field(grid.t(k));
        for (int i = 0; i < n; ++i) {
            double mean = 0.0, sup = 0.0;
            for (int m = 0; m < ens.M; ++m) {
                mean += sol.Y.at(m, k, i);
                sup = std::max(sup, std::abs(sol.Y.at(m, k, i)));
            }
            csv += "," + csv_field(mean / ens.M) + "," + csv_field(sup);
        }
        csv += "\r\n";
    }
    write_file(out_dir / "timeseries.csv", csv);
    manifest["outputs"].push_back("timeseries.csv");
    manifest["summary"] = {{"converged", sol.converged}, {"diverged", sol.diverged}};
    return result;
}

json run_classify(const json& cfg, json& manifest) {
    require_keys(cfg, {"kind", "seed", "generator", "sample_plan", "out_dir"},
                 {"kind", "seed", "generator"}, "config");
    const GeneratorSpec spec = parse_generator(cfg.at("generator"));
    const json pj = cfg.value("sample_plan", json::object());
    require_keys(pj, {"count", "y_radius", "z_radius", "t_max"}, {}, "sample_plan");
    SamplePlan plan;
    plan.count = pj.value("count", 4096);
    plan.y_radius = pj.value("y_radius", 10.0);
    plan.z_radius = pj.value("z_radius", 10.0);
    plan.t_max = pj.value("t_max", 1.0);
    plan.seed = cfg.at("seed").get<std::uint64_t>();
    const ClassificationVerdict verdict = classify_assumptions(spec, plan);
    manifest["summary"] = {{"b2_satisfied", verdict.b2.satisfied},
                           {"d2_satisfied", verdict.d2.satisfied}};
    return verdict.to_json();
}

json run_constants(const json& cfg, json& manifest) {
    require_keys(cfg,
                 {"kind", "seed", "which", "params", "norm_inputs", "T", "c0", "partition",
                  "out_dir"},
                 {"kind", "seed", "which", "params"}, "config");
    StructuralParams params = parse_params(cfg.at("params"));
    if (params.p == 1.0 && params.lambda > 0.0)
        throw ConfigError(
            "constants: p = 1 is admissible only when lambda = 0 (local-solvability exception "
            "clause)");
    const NormInputs norms = parse_norm_inputs(cfg.value("norm_inputs", json::object()));
    const double T = cfg.value("T", 1.0);
    const double c0 = cfg.value("c0", 2.0);
    const std::string which = cfg.at("which").get<std::string>();

    json result;
    if (which == "local") {
        result = compute_local_constants(params, norms, T, c0).to_json();
        manifest["summary"] = {{"K", result.at("K")}, {"eps_max", result.at("eps_max")}};
    } else if (which == "global41") {
        result = compute_global_constants_41(params, norms, T, c0).to_json();
        manifest["summary"] = {{"K_tilde", result.at("K_tilde")}};
    } else if (which == "global42c") {
        const json pj = cfg.value("partition", json::object());
        require_keys(pj, {"n1", "n2", "n3"}, {"n1", "n2", "n3"}, "partition");
        Partition42c part{pj.at("n1").get<int>(), pj.at("n2").get<int>(), pj.at("n3").get<int>()};
        result = compute_global_constants_42c(params, part, norms, T).to_json();
        manifest["summary"] = {{"K_tilde", result.at("K_tilde")}};
    } else {
        throw ConfigError("constants: unknown which '" + which + "'");
    }
    return result;
}

json matrix_to_json(const Eigen::MatrixXd& A) {
    json rows = json::array();
    for (int i = 0; i < A.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < A.cols(); ++j) row.push_back(A(i, j));
        rows.push_back(row);
    }
    return rows;
}

json run_transform(const json& cfg, json& manifest) {
    require_keys(cfg,
                 {"kind", "seed", "which", "a", "b", "theta1", "vartheta1", "theta2", "vartheta2",
                  "alpha", "beta", "A1", "A2", "generator", "out_dir"},
                 {"kind", "seed", "which"}, "config");
    const std::string which = cfg.at("which").get<std::string>();
    json result;
    if (which == "2.11g" || which == "2.14b") {
        const auto bv = cfg.at("b").get<std::vector<double>>();
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(bv.data(), bv.size());
        const GeneratorSpec spec = cfg.contains("generator")
                                       ? parse_generator(cfg.at("generator"))
                                       : gallery("burgers", {{"n", static_cast<int>(b.size())}});
        TransformSpec tf;
        try {
            if (which == "2.11g") {
                tf = build_transform_2_11g(spec, b);
            } else {
                const auto av = cfg.at("a").get<std::vector<double>>();
                Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(av.data(), av.size());
                tf = build_transform_2_14b(spec, a, b);
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("transform: ") + e.what());
        }
        result = {{"A", matrix_to_json(tf.A)},
                  {"A_inv", matrix_to_json(tf.A_inv)},
                  {"det", tf.det},
                  {"condition_number", tf.condition_number},
                  {"provenance", tf.provenance}};
        manifest["summary"] = {{"det", tf.det}};
    } else if (which == "2.12d") {
        const Verdict212d v =
            check_thm_2_12d(cfg.value("theta1", 0.0), cfg.value("vartheta1", 0.0),
                            cfg.value("theta2", 0.0), cfg.value("vartheta2", 0.0));
        result = {{"nonsolvable", v.nonsolvable},
                  {"scaling", matrix_to_json(v.scaling)},
                  {"coefficients", {v.coeff1, v.coeff2}},
                  {"check_error", v.check_error}};
        manifest["summary"] = {{"nonsolvable", v.nonsolvable}};
    } else if (which == "2.15b") {
        const bool ok = check_cor_2_15b(cfg.value("alpha", 0.0), cfg.value("beta", 0.0));
        result = {{"applies", ok}};
        manifest["summary"] = {{"applies", ok}};
    } else if (which == "2.16b") {
        const auto read2 = [&](const char* key) {
            const auto rows = cfg.at(key).get<std::vector<std::vector<double>>>();
            Eigen::Matrix2d m;
            m << rows[0][0], rows[0][1], rows[1][0], rows[1][1];
            return m;
        };
        const Verdict216b v = check_prop_2_16b(read2("A1"), read2("A2"));
        result = {{"combination_found", v.combination_found},
                  {"a", v.a},
                  {"b", v.b},
                  {"iota", v.iota},
                  {"residual", v.residual},
                  {"alpha11", v.alpha11},
                  {"alpha22", v.alpha22},
                  {"applies", v.applies}};
        manifest["summary"] = {{"applies", v.applies}};
    } else {
        throw ConfigError("transform: unknown which '" + which + "'");
    }
    return result;
}

json run_norms(const json& cfg, json& manifest) {
    require_keys(cfg,
                 {"kind", "seed", "grid", "ensemble", "process", "interval", "einf_rates",
                  "basis_degree", "out_dir"},
                 {"kind", "seed", "grid", "ensemble", "process"}, "config");
    const TimeGrid grid = parse_grid(cfg.at("grid"));
    const json ens_cfg = cfg.at("ensemble");
    require_keys(ens_cfg, {"M", "d"}, {"M"}, "ensemble");
    const BrownianEnsemble ens = generate_paths(cfg.at("seed").get<std::uint64_t>(),
                                                ens_cfg.at("M").get<int>(), grid,
                                                ens_cfg.value("d", 1));
    const json pj = cfg.at("process");
    require_keys(pj, {"type", "c"}, {"type"}, "process");
    const std::string type = pj.at("type").get<std::string>();
    PathProcess proc(ens, 1);
    if (type == "constant") {
        const double c = pj.value("c", 1.0);
        for (auto& v : proc.values) v = c;
    } else if (type == "abs_brownian") {
        for (int m = 0; m < ens.M; ++m)
            for (int k = 0; k <= grid.N; ++k) proc.at(m, k, 0) = std::abs(ens.b(m, k, 0));
    } else if (type == "brownian") {
        for (int m = 0; m < ens.M; ++m)
            for (int k = 0; k <= grid.N; ++k) proc.at(m, k, 0) = ens.b(m, k, 0);
    } else {
        throw ConfigError("process: unknown type '" + type + "'");
    }
    Interval iv = full_interval(grid);
    if (cfg.contains("interval")) {
        const auto ab = cfg.at("interval").get<std::vector<double>>();
        if (ab.size() != 2) throw ConfigError("interval: expected [a, b]");
        iv = make_interval(grid, ab[0], ab[1]);
    }
    NormOptions opts;
    opts.basis_degree = cfg.value("basis_degree", 3);
    const auto rates = cfg.value("einf_rates", std::vector<double>{0.5, 1.0, 2.0});
    const NormReport rep = estimate_norms(proc, iv, rates, opts);
    manifest["summary"] = {{"sup_norm", rep.sup_norm}, {"bmo", rep.bmo}};
    return rep.to_json();
}

}  // namespace

std::string config_hash(const json& config) {
    const std::string dump = config.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string csv_field(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

nlohmann::json gallery_table() {
    json table = json::array();
    auto entries = list_gallery();
    std::sort(entries.begin(), entries.end(),
              [](const GalleryEntry& a, const GalleryEntry& b) { return a.label < b.label; });
    for (const auto& e : entries) table.push_back({{"label", e.label}, {"description", e.description}});
    return table;
}

nlohmann::json run_experiment(const json& config, const std::filesystem::path& out_dir,
                              bool quiet) {
    if (!config.is_object()) throw ConfigError("config: object expected");
    if (!config.contains("seed")) throw ConfigError("config: missing key 'seed'");
    if (!config.contains("kind")) throw ConfigError("config: missing key 'kind'");
    const std::string kind = config.at("kind").get<std::string>();

    std::filesystem::create_directories(out_dir);
    json manifest;
    manifest["artifact_version"] = kArtifactVersion;
    manifest["config_hash"] = config_hash(config);
    manifest["experiment"] = kind;
    manifest["seed"] = config.at("seed");
    manifest["outputs"] = json::array();

    const auto t0 = std::chrono::steady_clock::now();
    json result;
    if (kind == "solve")
        result = run_solve(config, out_dir, manifest);
    else if (kind == "classify")
        result = run_classify(config, manifest);
    else if (kind == "constants")
        result = run_constants(config, manifest);
    else if (kind == "transform")
        result = run_transform(config, manifest);
    else if (kind == "norms")
        result = run_norms(config, manifest);
    else
        throw ConfigError("config: unknown kind '" + kind + "'");
    const auto t1 = std::chrono::steady_clock::now();

    write_file(out_dir / "result.json", result.dump(2) + "\n");
    manifest["outputs"].push_back("result.json");
    manifest["timings_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

    if (!quiet)
        std::cout << "[qbsde] " << kind << " done, hash " << manifest["config_hash"].get<std::string>()
                  << ", outputs in " << out_dir.string() << "\n";
    return manifest;
}

int run_cli(const std::string& config_path, const std::optional<std::string>& out_dir,
            std::optional<std::uint64_t> seed_override, bool quiet) {
    try {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot read config file " + config_path);
        json config;
        try {
            config = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        if (seed_override) config["seed"] = *seed_override;

        std::filesystem::path dir;
        if (out_dir) {
            dir = *out_dir;
        } else if (const char* env = std::getenv("QBSDE_OUT_DIR")) {
            dir = env;
        } else {
            dir = "qbsde-out";
        }
        if (config.contains("out_dir") && !out_dir)
            dir = config.at("out_dir").get<std::string>();

        run_experiment(config, dir, quiet);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace qbsde
