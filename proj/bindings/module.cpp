#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "apcre/design.hpp"
#include "apcre/diagnostics.hpp"
#include "apcre/effects.hpp"
#include "apcre/orthopoly.hpp"
#include "apcre/reml.hpp"
#include "apcre/simulation.hpp"
#include "apcre/solver.hpp"
#include "apcre/version.hpp"

namespace py = pybind11;

namespace {

using namespace apcre;

std::vector<Factor> to_factors(const std::vector<std::string>& names) {
    std::vector<Factor> fs;
    fs.reserve(names.size());
    for (const std::string& n : names) fs.push_back(factor_from_name(n));
    return fs;
}

py::dict grid_dict(const Grid& grid) {
    py::list cells;
    for (const Cell& cell : grid.cells) cells.append(py::make_tuple(cell.i, cell.j, cell.k));
    py::dict out;
    out["a"] = grid.a;
    out["p"] = grid.p;
    out["c"] = grid.c;
    out["cells"] = cells;
    return out;
}

py::dict decomposition_dict(const EffectDecomposition& d) {
    py::dict out;
    out["level"] = d.level;
    out["linear_slope"] = d.linear_slope;
    out["nonlinear"] = d.nonlinear;
    out["level_sq"] = d.level_sq;
    out["linear_sq"] = d.linear_sq;
    out["nonlinear_sq"] = d.nonlinear_sq;
    return out;
}

py::dict effects_dict(const EffectEstimate& est) {
    py::dict blocks;
    for (const BlockEstimate& b : est.blocks) {
        py::dict bd;
        bd["random"] = b.random;
        bd["coefficients"] = b.coefficients;
        bd["values"] = b.values;
        bd["decomposition"] = decomposition_dict(b.decomposition);
        blocks[py::str(b.name)] = bd;
    }
    py::dict out;
    out["theta"] = est.theta;
    out["blocks"] = blocks;
    out["rss"] = est.rss;
    out["penalty_value"] = est.penalty_value;
    return out;
}

py::dict vc_dict(const VarianceComponents& vc) {
    py::dict out;
    out["sigma2_e"] = vc.sigma2_e;
    for (const auto& [f, s] : vc.sigma2_re) {
        out[py::str(std::string("sigma2_") + factor_name(f))] = s;
    }
    return out;
}

py::dict fit_dict(const FittedModel& fit) {
    py::dict lambdas;
    for (const auto& [f, l] : fit.penalty.lambda) lambdas[py::str(factor_name(f))] = l;
    py::list starts;
    for (const StartResult& s : fit.convergence.starts) {
        py::dict sd;
        sd["start"] = vc_dict(s.start);
        sd["optimum"] = vc_dict(s.optimum);
        sd["value"] = s.value;
        sd["evals"] = s.evals;
        sd["converged"] = s.converged;
        starts.append(sd);
    }
    py::dict conv;
    conv["n_distinct_maxima"] = fit.convergence.n_distinct_maxima;
    conv["multiple_maxima"] = fit.convergence.multiple_maxima;
    conv["selected_start"] = fit.convergence.selected_start;
    conv["note"] = fit.convergence.note;
    conv["starts"] = starts;

    py::dict out;
    out["variance"] = vc_dict(fit.variance);
    out["lambda"] = lambdas;
    out["rl_value"] = fit.rl_value;
    out["effects"] = effects_dict(fit.effects);
    out["convergence"] = conv;
    return out;
}

DesignBundle bundle_for(int a, int p, const std::vector<std::string>& random) {
    Grid grid = build_grid(a, p);
    if (random.empty()) {
        return fe_design(grid, {Factor::age, Factor::period, Factor::cohort});
    }
    return build_model(grid, to_factors(random));
}

}  // namespace

PYBIND11_MODULE(_apcre, m) {
    m.doc() = "age-period-cohort mixed models: designs, penalized fits, restricted likelihood";
    m.attr("__version__") = kVersion;

    m.def(
        "build_grid", [](int a, int p) { return grid_dict(build_grid(a, p)); }, py::arg("a"),
        py::arg("p"), "cell layout with the cohort index of every (age, period) pair");

    m.def(
        "fe_design",
        [](int a, int p, const std::vector<std::string>& factors) {
            return fe_design(build_grid(a, p), to_factors(factors)).W;
        },
        py::arg("a"), py::arg("p"), py::arg("factors"),
        "intercept plus sum-to-zero blocks for the requested factors");

    m.def(
        "re_design",
        [](int a, int p, const std::string& factor) {
            return re_design(build_grid(a, p), factor_from_name(factor));
        },
        py::arg("a"), py::arg("p"), py::arg("factor"), "indicator block, one column per level");

    m.def(
        "design",
        [](int a, int p, const std::vector<std::string>& random) {
            DesignBundle bundle = bundle_for(a, p, random);
            py::dict z;
            for (std::size_t b = 0; b < bundle.Z.size(); ++b) {
                z[py::str(factor_name(bundle.re_blocks[b].factor))] = bundle.Z[b];
            }
            py::dict out;
            out["W"] = bundle.W;
            out["Z"] = z;
            out["combined"] = bundle.combined();
            return out;
        },
        py::arg("a"), py::arg("p"), py::arg("random") = std::vector<std::string>{},
        "mixed design: fixed part and one identity block per random factor "
        "(no random factors gives the all-fixed design)");

    m.def("null_space_basis", &null_space_basis, py::arg("M"), py::arg("tol") = 1e-10);
    m.def("rank_deficiency", &rank_deficiency, py::arg("M"), py::arg("tol") = 1e-10);
    m.def("intercept_redundancy_check", &intercept_redundancy_check, py::arg("Z"));

    m.def(
        "orthonormal_poly_basis", [](int n) { return orthonormal_poly_basis(n).B; }, py::arg("n"),
        "columns are the constant, linear, quadratic, ... orthonormal contrasts");

    m.def(
        "decompose_effect",
        [](const Eigen::VectorXd& values) { return decomposition_dict(decompose_effect(values)); },
        py::arg("values"), "split an effect vector into level, linear trend, and curvature");

    m.def(
        "solve_penalized",
        [](int a, int p, const std::vector<std::string>& random,
           const std::map<std::string, double>& lambdas, const Eigen::VectorXd& y) {
            DesignBundle bundle = bundle_for(a, p, random);
            PenaltySpec penalty;
            for (const auto& [name, l] : lambdas) penalty.lambda[factor_from_name(name)] = l;
            return effects_dict(solve_penalized(bundle, penalty, y));
        },
        py::arg("a"), py::arg("p"), py::arg("random"), py::arg("lambdas"), py::arg("y"),
        "ridge solve at fixed block weights (math.inf pins a block at zero)");

    m.def(
        "fit",
        [](int a, int p, const std::vector<std::string>& random, const Eigen::VectorXd& y,
           const std::string& policy) {
            DesignBundle bundle = bundle_for(a, p, random);
            return fit_dict(fit_re_apc(bundle, y, start_policy_from_name(policy)));
        },
        py::arg("a"), py::arg("p"), py::arg("random"), py::arg("y"),
        py::arg("policy") = "multistart_global",
        "two-step fit: restricted-likelihood variances, then the ridge solve");

    m.def(
        "restricted_loglik",
        [](int a, int p, const std::vector<std::string>& random, const Eigen::VectorXd& y,
           double sigma2_e, const std::map<std::string, double>& sigma2_re) {
            VarianceComponents vc;
            vc.sigma2_e = sigma2_e;
            for (const auto& [name, s] : sigma2_re) vc.sigma2_re[factor_from_name(name)] = s;
            return restricted_loglik(vc, bundle_for(a, p, random), y);
        },
        py::arg("a"), py::arg("p"), py::arg("random"), py::arg("y"), py::arg("sigma2_e"),
        py::arg("sigma2_re"));

    m.def(
        "profiled_rl",
        [](int a, int p, const Eigen::VectorXd& y, double sigma2_p, double sigma2_c) {
            DesignBundle bundle = build_model(build_grid(a, p), {Factor::period, Factor::cohort});
            return profiled_rl(sigma2_p, sigma2_c, bundle, y);
        },
        py::arg("a"), py::arg("p"), py::arg("y"), py::arg("sigma2_p"), py::arg("sigma2_c"),
        "restricted log-likelihood with the error variance maximized out "
        "(age fixed, period and cohort random)");

    m.def(
        "scan_rl_surface",
        [](int a, int p, const Eigen::VectorXd& y, double min_positive, double max_positive,
           int points) {
            DesignBundle bundle = build_model(build_grid(a, p), {Factor::period, Factor::cohort});
            SurfaceGridSpec gs;
            gs.min_positive = min_positive;
            gs.max_positive = max_positive;
            gs.points = points;
            RLSurface surf = scan_rl_surface(bundle, y, gs);
            py::list maxima;
            for (const SurfaceMaximum& sm : surf.local_maxima) {
                py::dict md;
                md[py::str(std::string("sigma2_") + factor_name(surf.factor_row))] =
                    sm.sigma2_re[0];
                md[py::str(std::string("sigma2_") + factor_name(surf.factor_col))] =
                    sm.sigma2_re[1];
                md["sigma2_e"] = sm.sigma2_e;
                md["value"] = sm.value;
                md["basin_size"] = sm.basin_size;
                maxima.append(md);
            }
            py::dict out;
            out["axis_row"] = surf.axis_row;
            out["axis_col"] = surf.axis_col;
            out["values"] = surf.values;
            out["maxima"] = maxima;
            return out;
        },
        py::arg("a"), py::arg("p"), py::arg("y"), py::arg("min_positive") = 1e-6,
        py::arg("max_positive") = 1e2, py::arg("points") = 9);

    m.def(
        "generate_dataset",
        [](double m, int replicate, int a, int p, double noise_sd, std::uint64_t seed) {
            SimSpec spec;
            spec.a = a;
            spec.p = p;
            spec.m_grid = {m};
            spec.replicates = 1;
            spec.noise_sd = noise_sd;
            spec.seed = seed;
            return generate_dataset(m, replicate, spec);
        },
        py::arg("m"), py::arg("replicate"), py::arg("a") = 6, py::arg("p") = 5,
        py::arg("noise_sd") = 0.01, py::arg("seed") = 5,
        "linear cohort trend plus m times the quadratic contrast plus keyed noise");

    m.def(
        "quadratic_decomposition",
        [](int a, int p) {
            QuadDecomposition qd = quadratic_decomposition(build_grid(a, p));
            py::dict out;
            out["total_sq"] = qd.total_sq;
            out["intercept_sq"] = qd.intercept_sq;
            out["age_sq"] = qd.age_sq;
            out["period_sq"] = qd.period_sq;
            out["cohort_residual_sq"] = qd.cohort_residual_sq;
            out["frac_intercept_age"] = qd.frac_intercept_age;
            out["frac_period"] = qd.frac_period;
            out["frac_cohort"] = qd.frac_cohort;
            return out;
        },
        py::arg("a"), py::arg("p"));

    m.def(
        "verify_single_re_sweep",
        [](int a_min, int a_max, int p_min, int p_max, const std::vector<double>& lambdas,
           const std::string& re_factor, double tol) {
            VerificationReport report = verify_single_re_sweep(
                a_min, a_max, p_min, p_max, lambdas, factor_from_name(re_factor), tol);
            py::dict out;
            out["rows"] = report.rows.size();
            out["overall_max_linear"] = report.overall_max_linear;
            out["overall_max_intercept"] = report.overall_max_intercept;
            out["tolerance"] = report.tolerance;
            out["pass"] = report.pass;
            return out;
        },
        py::arg("a_min"), py::arg("a_max"), py::arg("p_min"), py::arg("p_max"), py::arg("lambdas"),
        py::arg("re_factor") = "cohort", py::arg("tol") = 1e-9);

    m.def(
        "transfer_property_check",
        [](int a, int p, int n_trials, std::uint64_t seed) {
            TransferCheckResult r = transfer_property_check(build_grid(a, p), n_trials, seed);
            py::dict out;
            out["pass"] = r.pass;
            out["trials"] = r.trials;
            out["worst_fit_rel_err"] = r.worst_fit_rel_err;
            out["worst_penalty_err"] = r.worst_penalty_err;
            out["first_failure_trial"] = r.first_failure_trial;
            return out;
        },
        py::arg("a"), py::arg("p"), py::arg("n_trials") = 1000, py::arg("seed") = 5);
}
