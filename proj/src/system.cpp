#include "qbsde/system.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qbsde {

namespace {

void check_problem(const SystemProblem& p) {
    const int n = p.spec.params.n;
    if (!p.ens) throw std::invalid_argument("system: missing ensemble");
    if (p.spec.params.d != p.ens->d)
        throw std::invalid_argument("system: generator d does not match ensemble");
    if (p.terminal.rows() != p.ens->M || p.terminal.cols() != n)
        throw std::invalid_argument("system: terminal must be M x n");
    for (int m = 0; m < p.terminal.rows(); ++m)
        if (p.terminal.row(m).norm() > p.terminal_bound + 1e-12)
            throw std::invalid_argument("system: terminal exceeds declared bound");
}

double pair_distance(const PathProcess& Ya, const PathProcess& Yb, const PathProcess& Za,
                     const PathProcess& Zb, const Interval& w, const Scalar1dOptions& sopts) {
    const PathProcess dY = difference(Ya, Yb);
    const PathProcess dZ = difference(Za, Zb);
    const NormOptions nopts{sopts.basis_degree, sopts.ridge, 700.0};
    const double bmo = estimate_bmo(dZ, w, nopts);
    return estimate_sup_norm(dY, w) + bmo * bmo;
}

}  // namespace

SystemSolution gamma_map(const PathProcess& U, const PathProcess& V, const SystemProblem& problem,
                         const SystemSolveOptions& opts) {
    check_problem(problem);
    const BrownianEnsemble& ens = *problem.ens;
    const int n = problem.spec.params.n;
    const int d = ens.d;
    const int M = ens.M;
    const Interval w = problem.window;
    if (U.dim != n || V.dim != n * d)
        throw std::invalid_argument("gamma_map: input pair has wrong dimensions");

    SystemSolution out;
    out.Y = PathProcess(ens, n);
    out.Z = PathProcess(ens, n * d);
    for (int m = 0; m < M; ++m)
        for (int i = 0; i < n; ++i) out.Y.at(m, w.kb, i) = problem.terminal(m, i);

    for (int i = 0; i < n; ++i) {
        std::string prov;
        for (int j = 0; j < n; ++j) prov += (j < i ? 'F' : (j == i ? 'S' : 'V'));
        out.row_provenance.push_back(prov);

        ScalarBSDEProblem sp;
        sp.ens = &ens;
        sp.window = w;
        sp.terminal = problem.terminal.col(i);
        sp.terminal_bound = problem.terminal_bound;
        const GeneratorSpec& spec = problem.spec;
        const PathProcess* Uin = &U;
        const PathProcess* Vin = &V;
        const PathProcess* Zout = &out.Z;
        sp.generator = [&spec, Uin, Vin, Zout, i, n, d](int m, int k, double t, double /*y*/,
                                                        const Eigen::RowVectorXd& z) {
            Eigen::VectorXd yvec(n);
            for (int j = 0; j < n; ++j) yvec(j) = Uin->at(m, k, j);
            Eigen::MatrixXd zmat(n, d);
            for (int j = 0; j < i; ++j)
                for (int c = 0; c < d; ++c) zmat(j, c) = Zout->at(m, k, j * d + c);
            zmat.row(i) = z;
            for (int j = i + 1; j < n; ++j)
                for (int c = 0; c < d; ++c) zmat(j, c) = Vin->at(m, k, j * d + c);
            return spec.evaluate(t, yvec, zmat, spec.procs.at(m, k))(i);
        };

        ScalarSolution ssol;
        try {
            Scalar1dOptions sopts = opts.scalar;
            sopts.compute_norms = false;  // system-level norms are computed once below
            ssol = solve_1d(sp, sopts);
        } catch (const std::exception& e) {
            throw std::runtime_error("gamma_map: component " + std::to_string(i + 1) +
                                     " failed: " + e.what());
        }
        for (int m = 0; m < M; ++m)
            for (int k = w.ka; k <= w.kb; ++k) {
                out.Y.at(m, k, i) = ssol.Y.at(m, k, 0);
                if (k < w.kb)
                    for (int c = 0; c < d; ++c) out.Z.at(m, k, i * d + c) = ssol.Z.at(m, k, c);
            }
    }

    const NormOptions nopts{opts.scalar.basis_degree, opts.scalar.ridge, 700.0};
    out.sup_Y = estimate_sup_norm(out.Y, w);
    const double bmo = estimate_bmo(out.Z, w, nopts);
    out.bmo2_Z = bmo * bmo;
    return out;
}

SystemSolution conditional_expectation_solve(const SystemProblem& problem,
                                             const SystemSolveOptions& opts) {
    SystemProblem zero = problem;
    const int n = problem.spec.params.n;
    zero.spec.eval = [n](double, const Eigen::VectorXd&, const Eigen::MatrixXd&,
                         const ProcVals&) { return Eigen::VectorXd(Eigen::VectorXd::Zero(n)); };
    const PathProcess U(*problem.ens, n);
    const PathProcess V(*problem.ens, n * problem.ens->d);
    return gamma_map(U, V, zero, opts);
}

SystemSolution picard_solve(const SystemProblem& problem, const SystemSolveOptions& opts,
                            const PathProcess* U0, const PathProcess* V0) {
    check_problem(problem);
    const Interval w = problem.window;

    PathProcess U, V;
    if (U0 && V0) {
        U = *U0;
        V = *V0;
    } else {
        SystemSolution warm = conditional_expectation_solve(problem, opts);
        U = warm.Y;
        V = warm.Z;
    }

    SystemSolution current;
    for (int it = 0; it < opts.max_outer_iters; ++it) {
        SystemSolution next;
        try {
            next = gamma_map(U, V, problem, opts);
        } catch (const std::exception&) {
            // a scalar solve blowing up mid-sweep is divergence data: keep
            // the last complete iterate and an infinite distance entry
            current.distance_log.push_back(std::numeric_limits<double>::infinity());
            current.converged = false;
            break;
        }
        const double dist = pair_distance(next.Y, U, next.Z, V, w, opts.scalar);
        next.distance_log = current.distance_log;
        next.distance_log.push_back(dist);
        next.row_provenance = current.row_provenance.empty() ? next.row_provenance
                                                             : current.row_provenance;
        current = std::move(next);
        if (!std::isfinite(dist)) break;
        if (dist < opts.distance_tol) {
            current.converged = true;
            break;
        }
        U = current.Y;
        V = current.Z;
    }
    for (std::size_t k = 0; k + 1 < current.distance_log.size(); ++k) {
        const double a = current.distance_log[k];
        const double b = current.distance_log[k + 1];
        current.contraction_ratios.push_back(a > 0 ? b / a
                                                   : std::numeric_limits<double>::infinity());
    }
    current.diverged = !current.converged;
    return current;
}

SystemSolution paste_intervals(const SystemProblem& problem, double eps,
                               const SystemSolveOptions& opts) {
    check_problem(problem);
    const BrownianEnsemble& ens = *problem.ens;
    const double dt = ens.grid.dt();
    const int steps = static_cast<int>(std::lround(eps / dt));
    if (steps < 1 || std::abs(steps * dt - eps) > 1e-9 * std::max(1.0, eps))
        throw std::invalid_argument("paste_intervals: eps must be a whole number of grid steps");
    const Interval full = problem.window;
    if (full.steps() % steps != 0)
        throw std::invalid_argument("paste_intervals: eps must divide the solve window");

    const int n = problem.spec.params.n;
    const int d = ens.d;
    const int n_windows = full.steps() / steps;

    SystemSolution out;
    out.Y = PathProcess(ens, n);
    out.Z = PathProcess(ens, n * d);
    out.converged = true;

    Eigen::MatrixXd terminal = problem.terminal;
    double bound = problem.terminal_bound;

    for (int wi = 0; wi < n_windows; ++wi) {
        SystemProblem sub = problem;
        sub.window = Interval{full.kb - (wi + 1) * steps, full.kb - wi * steps};
        sub.terminal = terminal;
        sub.terminal_bound = bound;

        SystemSolution sol = picard_solve(sub, opts);

        WindowRecord rec;
        rec.index = wi;
        rec.window = sub.window;
        rec.converged = sol.converged;
        rec.iterations = static_cast<int>(sol.distance_log.size());
        rec.sup_Y = sol.sup_Y;
        rec.bmo2_Z = sol.bmo2_Z;
        out.windows.push_back(rec);
        out.converged = out.converged && sol.converged;
        out.diverged = out.diverged || sol.diverged;
        if (out.row_provenance.empty()) out.row_provenance = sol.row_provenance;

        for (int m = 0; m < ens.M; ++m) {
            for (int k = sub.window.ka; k <= sub.window.kb; ++k)
                for (int i = 0; i < n; ++i) out.Y.at(m, k, i) = sol.Y.at(m, k, i);
            for (int k = sub.window.ka; k < sub.window.kb; ++k)
                for (int c = 0; c < n * d; ++c) out.Z.at(m, k, c) = sol.Z.at(m, k, c);
        }

        if (!sol.converged) break;  // flagged window index is in the record

        terminal.resize(ens.M, n);
        for (int m = 0; m < ens.M; ++m)
            for (int i = 0; i < n; ++i) terminal(m, i) = sol.Y.at(m, sub.window.ka, i);
        bound = 0.0;
        for (int m = 0; m < ens.M; ++m) bound = std::max(bound, terminal.row(m).norm());
    }

    const NormOptions nopts{opts.scalar.basis_degree, opts.scalar.ridge, 700.0};
    out.sup_Y = estimate_sup_norm(out.Y, full);
    const double bmo = estimate_bmo(out.Z, full, nopts);
    out.bmo2_Z = bmo * bmo;
    return out;
}

Eigen::MatrixXd residual_paths(const PathProcess& Y, const PathProcess& Z,
                               const SystemProblem& problem) {
    const BrownianEnsemble& ens = *problem.ens;
    const int n = problem.spec.params.n;
    const int d = ens.d;
    if (Y.dim != n || Z.dim != n * d) throw std::invalid_argument("residual_paths: shape mismatch");
    const Interval w = problem.window;
    const double dt = ens.grid.dt();

    Eigen::MatrixXd R(ens.M, n);
    Eigen::VectorXd yvec(n);
    Eigen::MatrixXd zmat(n, d);
    for (int m = 0; m < ens.M; ++m) {
        Eigen::VectorXd gsum = Eigen::VectorXd::Zero(n);
        Eigen::VectorXd zsum = Eigen::VectorXd::Zero(n);
        for (int k = w.ka; k < w.kb; ++k) {
            for (int i = 0; i < n; ++i) yvec(i) = Y.at(m, k, i);
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < d; ++c) zmat(i, c) = Z.at(m, k, i * d + c);
            gsum += problem.spec.evaluate(ens.grid.t(k), yvec, zmat,
                                          problem.spec.procs.at(m, k)) *
                    dt;
            for (int i = 0; i < n; ++i)
                for (int c = 0; c < d; ++c) zsum(i) += zmat(i, c) * ens.inc(m, k, c);
        }
        for (int i = 0; i < n; ++i)
            R(m, i) = Y.at(m, w.ka, i) - problem.terminal(m, i) - gsum(i) + zsum(i);
    }
    return R;
}

Eigen::VectorXd residual_check(const SystemSolution& sol, const SystemProblem& problem,
                               bool max_over_start_times) {
    const int n = problem.spec.params.n;
    const auto rms_from = [&](const Interval& w) {
        SystemProblem sub = problem;
        sub.window = w;
        sub.terminal.resize(problem.ens->M, n);
        for (int m = 0; m < problem.ens->M; ++m)
            for (int i = 0; i < n; ++i) sub.terminal(m, i) = sol.Y.at(m, w.kb, i);
        sub.terminal_bound = std::numeric_limits<double>::infinity();
        const Eigen::MatrixXd R = residual_paths(sol.Y, sol.Z, sub);
        return Eigen::VectorXd(R.array().square().colwise().mean().sqrt().transpose().matrix());
    };

    Interval base = problem.window;
    // anchor against the problem's own terminal at the window end
    SystemProblem anchored = problem;
    const Eigen::MatrixXd R = residual_paths(sol.Y, sol.Z, anchored);
    Eigen::VectorXd rms = R.array().square().colwise().mean().sqrt().transpose().matrix();
    if (!max_over_start_times) return rms;

    for (int ka = base.ka + 1; ka < base.kb; ++ka) {
        const Eigen::VectorXd r = rms_from(Interval{ka, base.kb});
        for (int i = 0; i < n; ++i) rms(i) = std::max(rms(i), r(i));
    }
    return rms;
}

}  // namespace qbsde
