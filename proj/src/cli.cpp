#include "apcre/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "apcre/design.hpp"
#include "apcre/diagnostics.hpp"
#include "apcre/effects.hpp"
#include "apcre/io_util.hpp"
#include "apcre/manifest.hpp"
#include "apcre/reml.hpp"
#include "apcre/simulation.hpp"
#include "apcre/solver.hpp"
#include "apcre/version.hpp"
#include "json.hpp"

namespace apcre {

namespace {

using nlohmann::json;

enum ExitCode : int {
    exit_ok = 0,
    exit_check_failed = 1,
    exit_usage = 2,
    exit_io = 3,
    exit_numeric = 4,
};

std::string default_out_dir() {
    const char* env = std::getenv("APCRE_OUT_DIR");
    return (env != nullptr && *env != '\0') ? env : ".";
}

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ',') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else if (ch != ' ') {
            cur += ch;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> values;
    for (const std::string& part : split_csv(text)) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(part, &pos);
        } catch (const std::exception&) {
            throw std::invalid_argument("not a number: " + part);
        }
        if (pos != part.size()) throw std::invalid_argument("not a number: " + part);
        values.push_back(v);
    }
    return values;
}

std::vector<Factor> factors_from_names(const std::vector<std::string>& names) {
    std::vector<Factor> out;
    for (const std::string& name : names) out.push_back(factor_from_name(name));
    std::sort(out.begin(), out.end(),
              [](Factor a, Factor b) { return static_cast<int>(a) < static_cast<int>(b); });
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i] == out[i - 1]) throw std::invalid_argument("duplicate factor in list");
    }
    return out;
}

json factor_names(const std::vector<Factor>& fs) {
    json arr = json::array();
    for (Factor f : fs) arr.push_back(factor_name(f));
    return arr;
}

json vec_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

json vc_json(const VarianceComponents& vc) {
    json j{{"sigma2_e", vc.sigma2_e}};
    for (const auto& [f, s] : vc.sigma2_re) j[std::string("sigma2_") + factor_name(f)] = s;
    return j;
}

json effects_json(const EffectEstimate& est) {
    json j;
    for (const BlockEstimate& b : est.blocks) {
        j[b.name] = json{
            {"random", b.random},
            {"coefficients", vec_json(b.coefficients)},
            {"values", vec_json(b.values)},
            {"level", b.decomposition.level},
            {"linear_slope", b.decomposition.linear_slope},
            {"nonlinear", vec_json(b.decomposition.nonlinear)},
            {"level_sq", b.decomposition.level_sq},
            {"linear_sq", b.decomposition.linear_sq},
            {"nonlinear_sq", b.decomposition.nonlinear_sq},
        };
    }
    return j;
}

json lambda_json(const PenaltySpec& penalty) {
    // null marks an infinite weight, i.e. a block shrunk to exactly zero
    json j;
    for (const auto& [f, l] : penalty.lambda) {
        j[factor_name(f)] = std::isinf(l) ? json() : json(l);
    }
    return j;
}

json convergence_json(const FitConvergence& conv) {
    json starts = json::array();
    for (const StartResult& s : conv.starts) {
        starts.push_back(json{{"start", vc_json(s.start)},
                              {"optimum", vc_json(s.optimum)},
                              {"value", s.value},
                              {"evals", s.evals},
                              {"converged", s.converged}});
    }
    return json{{"n_distinct_maxima", conv.n_distinct_maxima},
                {"multiple_maxima", conv.multiple_maxima},
                {"selected_start", conv.selected_start},
                {"note", conv.note},
                {"starts", starts}};
}

json fit_json(const Grid& grid, const ModelSpec& spec, StartPolicy policy,
              const FittedModel& fit) {
    return json{{"a", grid.a},
                {"p", grid.p},
                {"c", grid.c},
                {"random", factor_names(spec.random)},
                {"policy", start_policy_name(policy)},
                {"variance", vc_json(fit.variance)},
                {"lambda", lambda_json(fit.penalty)},
                {"rl_value", fit.rl_value},
                {"rss", fit.effects.rss},
                {"penalty_value", fit.effects.penalty_value},
                {"effects", effects_json(fit.effects)},
                {"convergence", convergence_json(fit.convergence)}};
}

void write_json(const std::string& path, const json& j) {
    atomic_write_file(path, j.dump(2) + "\n");
}

int execute_design(const json& prm, const std::string& out, std::vector<std::string>& outputs) {
    Grid grid = build_grid(prm.at("a").get<int>(), prm.at("p").get<int>());
    std::vector<Factor> factors = factors_from_names(prm.at("factors"));
    std::vector<Factor> random = factors_from_names(prm.at("random"));
    if (factors.empty()) throw std::invalid_argument("need at least one factor");
    if (random.size() > 2) throw std::invalid_argument("at most two factors can be random");
    for (Factor f : random) {
        if (std::find(factors.begin(), factors.end(), f) == factors.end()) {
            throw std::invalid_argument("random factor not in the factor list");
        }
    }

    DesignBundle bundle;
    if (random.empty()) {
        bundle = fe_design(grid, factors);
    } else {
        if (factors.size() != 3) {
            throw std::invalid_argument("random blocks require all three factors in the model");
        }
        bundle = build_model(grid, random);
    }

    Eigen::MatrixXd q = bundle.combined();
    write_matrix_csv(q, out + "/design_matrix.csv");

    Eigen::MatrixXd basis = null_space_basis(q);
    double max_null_residual = 0.0;
    json null_basis = json::array();
    for (int col = 0; col < basis.cols(); ++col) {
        max_null_residual = std::max(max_null_residual, (q * basis.col(col)).norm());
        null_basis.push_back(vec_json(basis.col(col)));
    }
    json redundancy;
    for (std::size_t b = 0; b < bundle.Z.size(); ++b) {
        redundancy[factor_name(bundle.re_blocks[b].factor)] =
            intercept_redundancy_check(bundle.Z[b]);
    }
    std::vector<Factor> fixed;
    for (const FactorBlock& blk : bundle.fe_blocks) fixed.push_back(blk.factor);

    json report{{"a", grid.a},
                {"p", grid.p},
                {"c", grid.c},
                {"fixed_factors", factor_names(fixed)},
                {"random_factors", factor_names(bundle.re_factors())},
                {"columns",
                 json{{"fixed", bundle.w_cols()},
                      {"random", bundle.z_cols()},
                      {"total", bundle.total_cols()}}},
                {"rank", numerical_rank(q)},
                {"rank_deficiency", rank_deficiency(q)},
                {"null_space_dim", static_cast<int>(basis.cols())},
                {"max_null_residual", max_null_residual},
                {"null_basis", null_basis},
                {"intercept_redundancy", redundancy}};
    write_json(out + "/design_report.json", report);

    outputs = {"design_matrix.csv", "design_report.json"};
    std::cout << "design " << q.rows() << " x " << q.cols() << ", rank deficiency "
              << rank_deficiency(q) << "\n";
    return exit_ok;
}

int execute_verify(const json& prm, const std::string& out, std::vector<std::string>& outputs) {
    VerificationReport report = verify_single_re_sweep(
        prm.at("a_min").get<int>(), prm.at("a_max").get<int>(), prm.at("p_min").get<int>(),
        prm.at("p_max").get<int>(), prm.at("lambdas").get<std::vector<double>>(),
        factor_from_name(prm.at("re_factor").get<std::string>()),
        prm.at("tolerance").get<double>());

    atomic_write_file(out + "/sweep_report.csv", sweep_report_csv(report));
    json summary{{"re_factor", factor_name(report.re_factor)},
                 {"a_min", prm.at("a_min")},
                 {"a_max", prm.at("a_max")},
                 {"p_min", prm.at("p_min")},
                 {"p_max", prm.at("p_max")},
                 {"lambdas", prm.at("lambdas")},
                 {"tolerance", report.tolerance},
                 {"rows", report.rows.size()},
                 {"overall_max_linear", report.overall_max_linear},
                 {"overall_max_intercept", report.overall_max_intercept},
                 {"pass", report.pass}};
    write_json(out + "/verify_summary.json", summary);

    outputs = {"sweep_report.csv", "verify_summary.json"};
    std::cout << "sweep rows " << report.rows.size() << ", max linear "
              << fmt_short(report.overall_max_linear) << ", max intercept "
              << fmt_short(report.overall_max_intercept) << ", pass "
              << (report.pass ? "true" : "false") << "\n";
    return report.pass ? exit_ok : exit_check_failed;
}

SimSpec sim_spec_from(const json& prm) {
    SimSpec spec;
    spec.a = prm.at("a").get<int>();
    spec.p = prm.at("p").get<int>();
    spec.m_grid = prm.at("m_grid").get<std::vector<double>>();
    spec.replicates = prm.at("replicates").get<int>();
    spec.noise_sd = prm.at("noise_sd").get<double>();
    spec.shrink_threshold = prm.at("shrink_threshold").get<double>();
    spec.seed = prm.at("seed").get<std::uint64_t>();
    return spec;
}

int execute_simulate(const json& prm, const std::string& out, std::vector<std::string>& outputs) {
    SimSpec spec = sim_spec_from(prm);
    StartPolicy policy = start_policy_from_name(prm.at("policy").get<std::string>());
    std::vector<SimSummaryRow> rows = run_shrinkage_study(spec, policy);
    atomic_write_file(out + "/shrinkage_counts.tsv", shrinkage_tsv(rows));
    outputs = {"shrinkage_counts.tsv"};
    std::cout << "shrinkage study: " << rows.size() << " m values x " << spec.replicates
              << " replicates, policy " << start_policy_name(policy) << "\n";
    return exit_ok;
}

int execute_profile(const json& prm, const std::string& out, std::vector<std::string>& outputs) {
    SimSpec spec;
    spec.a = prm.at("a").get<int>();
    spec.p = prm.at("p").get<int>();
    spec.noise_sd = prm.at("noise_sd").get<double>();
    spec.seed = prm.at("seed").get<std::uint64_t>();
    double m = prm.at("m").get<double>();
    spec.m_grid = {m};
    spec.replicates = 1;
    int replicate = prm.at("replicate").get<int>();

    Eigen::VectorXd y = generate_dataset(m, replicate, spec);
    Grid grid = build_grid(spec.a, spec.p);
    DesignBundle bundle = build_model(grid, {Factor::period, Factor::cohort});

    SurfaceGridSpec gs;
    gs.min_positive = prm.at("min_positive").get<double>();
    gs.max_positive = prm.at("max_positive").get<double>();
    gs.points = prm.at("points").get<int>();
    RLSurface surf = scan_rl_surface(bundle, y, gs);

    std::string row_name = factor_name(surf.factor_row);
    std::string col_name = factor_name(surf.factor_col);
    std::string csv = "sigma2_" + row_name + ",sigma2_" + col_name + ",profiled_rl\n";
    for (std::size_t i = 0; i < surf.axis_row.size(); ++i) {
        for (std::size_t j = 0; j < surf.axis_col.size(); ++j) {
            csv += fmt_full(surf.axis_row[i]);
            csv += ',';
            csv += fmt_full(surf.axis_col[j]);
            csv += ',';
            csv += fmt_full(surf.values(static_cast<int>(i), static_cast<int>(j)));
            csv += '\n';
        }
    }
    atomic_write_file(out + "/rl_surface.csv", csv);

    json maxima = json::array();
    for (const SurfaceMaximum& sm : surf.local_maxima) {
        maxima.push_back(json{{"sigma2_" + row_name, sm.sigma2_re[0]},
                              {"sigma2_" + col_name, sm.sigma2_re[1]},
                              {"sigma2_e", sm.sigma2_e},
                              {"value", sm.value},
                              {"basin_size", sm.basin_size}});
    }
    write_json(out + "/rl_maxima.json",
               json{{"factor_row", row_name}, {"factor_col", col_name}, {"maxima", maxima}});

    outputs = {"rl_surface.csv", "rl_maxima.json"};
    std::cout << "profiled surface " << surf.axis_row.size() << " x " << surf.axis_col.size()
              << ", " << surf.local_maxima.size() << " local maxima\n";
    return exit_ok;
}

int execute_fit(const json& prm, const std::string& out, std::vector<std::string>& outputs) {
    CellData data = read_cell_csv(prm.at("data").get<std::string>());
    ModelSpec spec;
    spec.random = factors_from_names(prm.at("random"));
    StartPolicy policy = start_policy_from_name(prm.at("policy").get<std::string>());

    FittedModel fit = fit_spec(data, spec, policy);
    write_json(out + "/fit_result.json", fit_json(data.grid, spec, policy, fit));

    SensitivityResult sens = sensitivity_fits(data, all_re_specs(), policy);
    atomic_write_file(out + "/sensitivity.tsv", sensitivity_tsv(sens));
    json specs = json::array();
    for (std::size_t s = 0; s < sens.specs.size(); ++s) {
        specs.push_back(json{{"name", sens.specs[s].name()},
                             {"random", factor_names(sens.specs[s].random)},
                             {"variance", vc_json(sens.fits[s].variance)},
                             {"lambda", lambda_json(sens.fits[s].penalty)},
                             {"rl_value", sens.fits[s].rl_value},
                             {"effects", effects_json(sens.fits[s].effects)}});
    }
    write_json(out + "/sensitivity.json", json{{"a", data.grid.a},
                                               {"p", data.grid.p},
                                               {"c", data.grid.c},
                                               {"policy", start_policy_name(policy)},
                                               {"specs", specs}});

    outputs = {"fit_result.json", "sensitivity.tsv", "sensitivity.json"};
    std::cout << "fit random=" << spec.name() << ", rl " << fmt_short(fit.rl_value) << ", "
              << sens.specs.size() << " specs in sensitivity table\n";
    return exit_ok;
}

int execute_decompose(const json& prm, const std::string& out, std::vector<std::string>& outputs) {
    Grid grid = build_grid(prm.at("a").get<int>(), prm.at("p").get<int>());
    QuadDecomposition qd = quadratic_decomposition(grid);
    atomic_write_file(out + "/quad_decomposition.csv", quad_decomposition_csv(qd));
    write_json(out + "/quad_decomposition.json",
               json{{"a", qd.a},
                    {"p", qd.p},
                    {"c", qd.c},
                    {"total_sq", qd.total_sq},
                    {"intercept_sq", qd.intercept_sq},
                    {"age_sq", qd.age_sq},
                    {"period_sq", qd.period_sq},
                    {"cohort_residual_sq", qd.cohort_residual_sq},
                    {"fractions",
                     json{{"intercept_age", qd.frac_intercept_age},
                          {"period", qd.frac_period},
                          {"cohort", qd.frac_cohort}}}});
    outputs = {"quad_decomposition.csv", "quad_decomposition.json"};
    std::cout << "quadratic split total " << fmt_short(qd.total_sq) << ", shares "
              << fmt_short(qd.frac_intercept_age) << " / " << fmt_short(qd.frac_period) << " / "
              << fmt_short(qd.frac_cohort) << "\n";
    return exit_ok;
}

int dispatch(const std::string& command, const json& params, const std::string& out_dir) {
    RunManifest mf;
    mf.command = command;
    mf.version = kVersion;
    mf.parameters = params;
    mf.started_at = utc_timestamp();

    int code = 0;
    std::vector<std::string> outputs;
    if (command == "design") {
        code = execute_design(params, out_dir, outputs);
    } else if (command == "verify") {
        code = execute_verify(params, out_dir, outputs);
    } else if (command == "simulate") {
        code = execute_simulate(params, out_dir, outputs);
    } else if (command == "profile") {
        code = execute_profile(params, out_dir, outputs);
    } else if (command == "fit") {
        code = execute_fit(params, out_dir, outputs);
    } else if (command == "decompose") {
        code = execute_decompose(params, out_dir, outputs);
    } else {
        throw std::invalid_argument("unknown command: " + command);
    }

    mf.outputs = outputs;
    mf.finished_at = utc_timestamp();
    write_manifest(mf, out_dir);
    return code;
}

std::string resolve_out(const std::string& opt) { return opt.empty() ? default_out_dir() : opt; }

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"fixed- and random-effect age-period-cohort modeling toolkit"};
    app.set_version_flag("--version", std::string("apcre ") + kVersion);
    app.require_subcommand(1);

    struct {
        int a = 3;
        int p = 3;
        std::string factors = "age,period,cohort";
        std::string re;
        std::string out;
    } dsn;
    CLI::App* design_cmd = app.add_subcommand("design", "write a design matrix and its rank report");
    design_cmd->add_option("--a", dsn.a, "age group count")->required()->check(CLI::Range(2, 200));
    design_cmd->add_option("--p", dsn.p, "period count")->required()->check(CLI::Range(2, 200));
    design_cmd->add_option("--factors", dsn.factors, "factors present in the model");
    design_cmd->add_option("--re", dsn.re, "factors treated as random (at most two)");
    design_cmd->add_option("--out", dsn.out, "output directory");

    struct {
        int a_min = 3;
        int a_max = 30;
        int p_min = 3;
        int p_max = 30;
        std::string lambdas = "0.001,0.01,0.1,1,10,100,1000";
        std::string re = "cohort";
        double tol = 1e-9;
        std::string out;
    } ver;
    CLI::App* verify_cmd =
        app.add_subcommand("verify", "sweep grids and ridge weights, bounding the fitted random "
                                     "block's level and slope response to any data");
    verify_cmd->add_option("--a-min", ver.a_min)->check(CLI::Range(3, 30));
    verify_cmd->add_option("--a-max", ver.a_max)->check(CLI::Range(3, 30));
    verify_cmd->add_option("--p-min", ver.p_min)->check(CLI::Range(3, 30));
    verify_cmd->add_option("--p-max", ver.p_max)->check(CLI::Range(3, 30));
    verify_cmd->add_option("--lambdas", ver.lambdas, "comma-separated ridge weights");
    verify_cmd->add_option("--re", ver.re, "the single random factor");
    verify_cmd->add_option("--tol", ver.tol, "pass tolerance");
    verify_cmd->add_option("--out", ver.out, "output directory");

    struct {
        int a = 6;
        int p = 5;
        std::string m_grid;
        int reps = 100;
        double noise_sd = 0.01;
        double threshold = 1e-2;
        std::uint64_t seed = 5;
        std::string policy = "multistart_global";
        std::string out;
    } sim;
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "cohort-signal study counting shrunk linear components");
    simulate_cmd->add_option("--a", sim.a)->check(CLI::Range(2, 200));
    simulate_cmd->add_option("--p", sim.p)->check(CLI::Range(2, 200));
    simulate_cmd->add_option("--m-grid", sim.m_grid,
                             "comma-separated quadratic magnitudes (default 0,0.05,...,1)");
    simulate_cmd->add_option("--reps", sim.reps, "replicates per m")->check(CLI::Range(1, 100000));
    simulate_cmd->add_option("--noise-sd", sim.noise_sd);
    simulate_cmd->add_option("--threshold", sim.threshold, "absolute slope counted as shrunk");
    simulate_cmd->add_option("--seed", sim.seed);
    simulate_cmd->add_option("--policy", sim.policy, "default_ones or multistart_global");
    simulate_cmd->add_option("--out", sim.out, "output directory");

    struct {
        int a = 6;
        int p = 5;
        double m = 0.0;
        int replicate = 0;
        double noise_sd = 0.01;
        std::uint64_t seed = 5;
        double min_positive = 1e-6;
        double max_positive = 100.0;
        int points = 9;
        std::string out;
    } prof;
    CLI::App* profile_cmd = app.add_subcommand(
        "profile", "profiled restricted-likelihood surface over the two block variances");
    profile_cmd->add_option("--a", prof.a)->check(CLI::Range(2, 200));
    profile_cmd->add_option("--p", prof.p)->check(CLI::Range(2, 200));
    profile_cmd->add_option("--m", prof.m, "quadratic magnitude of the generated dataset");
    profile_cmd->add_option("--replicate", prof.replicate)->check(CLI::Range(0, 1000000));
    profile_cmd->add_option("--noise-sd", prof.noise_sd);
    profile_cmd->add_option("--seed", prof.seed);
    profile_cmd->add_option("--min", prof.min_positive, "smallest positive axis value");
    profile_cmd->add_option("--max", prof.max_positive, "largest axis value");
    profile_cmd->add_option("--points", prof.points, "positive points per axis")
        ->check(CLI::Range(2, 200));
    profile_cmd->add_option("--out", prof.out, "output directory");

    struct {
        std::string data;
        std::string re = "period,cohort";
        std::string policy = "multistart_global";
        std::string out;
    } fitc;
    CLI::App* fit_cmd =
        app.add_subcommand("fit", "fit one model to cell-mean data and compare all random choices");
    fit_cmd->add_option("--data", fitc.data, "cell csv (age_index,period_index,value[,weight])")
        ->required();
    fit_cmd->add_option("--re", fitc.re, "random factors of the primary fit");
    fit_cmd->add_option("--policy", fitc.policy, "default_ones or multistart_global");
    fit_cmd->add_option("--out", fitc.out, "output directory");

    struct {
        int a = 6;
        int p = 5;
        std::string out;
    } dec;
    CLI::App* decompose_cmd = app.add_subcommand(
        "decompose", "split the cohort quadratic contrast across intercept, age, and period");
    decompose_cmd->add_option("--a", dec.a)->check(CLI::Range(2, 200));
    decompose_cmd->add_option("--p", dec.p)->check(CLI::Range(2, 200));
    decompose_cmd->add_option("--out", dec.out, "output directory");

    struct {
        std::string manifest;
        std::string out;
    } rer;
    CLI::App* rerun_cmd = app.add_subcommand("rerun", "run a command again from its manifest");
    rerun_cmd->add_option("--manifest", rer.manifest, "path to a manifest.json")->required();
    rerun_cmd->add_option("--out", rer.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*design_cmd) {
            json params{{"a", dsn.a},
                        {"p", dsn.p},
                        {"factors", factor_names(factors_from_names(split_csv(dsn.factors)))},
                        {"random", factor_names(factors_from_names(split_csv(dsn.re)))}};
            return dispatch("design", params, resolve_out(dsn.out));
        }
        if (*verify_cmd) {
            json params{{"a_min", ver.a_min},
                        {"a_max", ver.a_max},
                        {"p_min", ver.p_min},
                        {"p_max", ver.p_max},
                        {"lambdas", parse_double_list(ver.lambdas)},
                        {"re_factor", factor_name(factor_from_name(ver.re))},
                        {"tolerance", ver.tol}};
            return dispatch("verify", params, resolve_out(ver.out));
        }
        if (*simulate_cmd) {
            std::vector<double> m_grid =
                sim.m_grid.empty() ? SimSpec::defaults().m_grid : parse_double_list(sim.m_grid);
            json params{{"a", sim.a},
                        {"p", sim.p},
                        {"m_grid", m_grid},
                        {"replicates", sim.reps},
                        {"noise_sd", sim.noise_sd},
                        {"shrink_threshold", sim.threshold},
                        {"seed", sim.seed},
                        {"policy", start_policy_name(start_policy_from_name(sim.policy))}};
            return dispatch("simulate", params, resolve_out(sim.out));
        }
        if (*profile_cmd) {
            json params{{"a", prof.a},
                        {"p", prof.p},
                        {"m", prof.m},
                        {"replicate", prof.replicate},
                        {"noise_sd", prof.noise_sd},
                        {"seed", prof.seed},
                        {"min_positive", prof.min_positive},
                        {"max_positive", prof.max_positive},
                        {"points", prof.points}};
            return dispatch("profile", params, resolve_out(prof.out));
        }
        if (*fit_cmd) {
            json params{{"data", fitc.data},
                        {"random", factor_names(parse_model_spec(fitc.re).random)},
                        {"policy", start_policy_name(start_policy_from_name(fitc.policy))}};
            return dispatch("fit", params, resolve_out(fitc.out));
        }
        if (*decompose_cmd) {
            json params{{"a", dec.a}, {"p", dec.p}};
            return dispatch("decompose", params, resolve_out(dec.out));
        }
        if (*rerun_cmd) {
            RunManifest mf = read_manifest(rer.manifest);
            return dispatch(mf.command, mf.parameters, resolve_out(rer.out));
        }
        return exit_usage;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return exit_io;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::invalid_argument& e) {
        std::cerr << "argument error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return exit_numeric;
    }
}

}  // namespace apcre
