// End-to-end checks of the library's core guarantees. Each check prints one
// [PASS]/[FAIL] line; the exit code is 0 only if every check passes.
#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "apcre/design.hpp"
#include "apcre/diagnostics.hpp"
#include "apcre/effects.hpp"
#include "apcre/grid.hpp"
#include "apcre/io_util.hpp"
#include "apcre/orthopoly.hpp"
#include "apcre/reml.hpp"
#include "apcre/rng.hpp"
#include "apcre/simulation.hpp"
#include "apcre/solver.hpp"
#include "json.hpp"

using namespace apcre;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
    std::printf("[%s] %s (%s)\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void check_design_sweep() {
    std::vector<double> lambdas = {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0};
    VerificationReport rep = verify_single_re_sweep(3, 30, 3, 30, lambdas);
    bool ok = rep.pass && rep.rows.size() == 5488;
    report("pinned level and slope across the full design sweep", ok,
           "rows " + std::to_string(rep.rows.size()) + ", max slope response " +
               fmt_short(rep.overall_max_linear) + ", max level response " +
               fmt_short(rep.overall_max_intercept) + ", bound 1e-9");
}

void check_rank_ladder() {
    bool ok = true;
    std::string first_bad;
    for (int a = 3; a <= 10 && ok; ++a) {
        for (int p = 3; p <= 10 && ok; ++p) {
            Grid g = build_grid(a, p);
            if (rank_deficiency(fe_design(g, {Factor::age, Factor::period, Factor::cohort}).W) !=
                1) {
                ok = false;
                first_bad = "all-fixed on " + std::to_string(a) + "x" + std::to_string(p);
                break;
            }
            for (Factor f : {Factor::age, Factor::period, Factor::cohort}) {
                if (rank_deficiency(build_model(g, {f}).combined()) != 2) {
                    ok = false;
                    first_bad = std::string("one random (") + factor_name(f) + ")";
                    break;
                }
            }
            std::vector<std::vector<Factor>> pairs = {{Factor::age, Factor::period},
                                                      {Factor::age, Factor::cohort},
                                                      {Factor::period, Factor::cohort}};
            for (const auto& pr : pairs) {
                if (rank_deficiency(build_model(g, pr).combined()) != 3) {
                    ok = false;
                    first_bad = "two random";
                    break;
                }
            }
        }
    }
    report("rank deficiency ladder 1/2/3 over all grids 3..10", ok,
           ok ? "448 designs checked" : first_bad);
}

void check_quadratic_split() {
    QuadDecomposition qd = quadratic_decomposition(build_grid(6, 5));
    bool ok = std::abs(qd.total_sq - 2.469697) < 1e-3 &&
              std::abs(qd.intercept_sq - 0.631313) < 1e-3 &&
              std::abs(qd.age_sq - 0.3535353) < 1e-3 &&
              std::abs(qd.period_sq - 0.1590908) < 1e-3 &&
              std::abs(qd.cohort_residual_sq - 1.325758) < 1e-3 &&
              std::abs(qd.frac_intercept_age - 0.399) < 2e-3 &&
              std::abs(qd.frac_period - 0.064) < 2e-3 &&
              std::abs(qd.frac_cohort - 0.537) < 2e-3;
    report("quadratic cohort split on the 6x5 grid", ok,
           "total " + fmt_short(qd.total_sq) + ", shares " + fmt_short(qd.frac_intercept_age) +
               " / " + fmt_short(qd.frac_period) + " / " + fmt_short(qd.frac_cohort));
}

void check_transfer_identities() {
    TransferCheckResult r = transfer_property_check(build_grid(6, 5), 1000, 5);
    report("transfer identities over 1000 random draws", r.pass,
           "worst fit error " + fmt_short(r.worst_fit_rel_err) + ", worst penalty error " +
               fmt_short(r.worst_penalty_err) + ", bound 1e-10");
}

void check_shrinkage_endpoints() {
    SimSpec spec = SimSpec::defaults();
    std::vector<SimSummaryRow> rows = run_shrinkage_study(spec, StartPolicy::multistart_global);

    bool ok = true;
    std::string why;
    int high_rows = 0;
    for (const SimSummaryRow& row : rows) {
        if (row.fit_failures != 0) {
            ok = false;
            why = "fit failures at m=" + fmt_short(row.m);
            break;
        }
        if (row.m == 0.0 && row.period_shrunk != 0) {
            ok = false;
            why = "period shrunk " + std::to_string(row.period_shrunk) + "/100 at m=0";
            break;
        }
        if (row.m >= 0.695) {
            ++high_rows;
            if (row.period_shrunk != row.replicates) {
                ok = false;
                why = "period shrunk " + std::to_string(row.period_shrunk) + "/" +
                      std::to_string(row.replicates) + " at m=" + fmt_short(row.m);
                break;
            }
        }
    }
    if (ok && high_rows != 7) {
        ok = false;
        why = "expected 7 rows with m >= 0.70";
    }
    report("shrinkage endpoints: none at zero curvature, all at strong curvature", ok,
           ok ? "21 magnitudes, 100 replicates each" : why);

    // every zero-curvature replicate shows two well-separated explanations:
    // one maximum puts the trend variance on period (cohort shrunk), one on
    // cohort (period shrunk); compare the best of each rather than the first
    // two list entries, since one ridge can contribute near-duplicate points
    Grid g = build_grid(spec.a, spec.p);
    DesignBundle bundle = build_model(g, {Factor::period, Factor::cohort});
    bool bimodal = true;
    double min_gap = std::numeric_limits<double>::infinity();
    std::string bad;
    for (int rep = 0; rep < spec.replicates && bimodal; ++rep) {
        Eigen::VectorXd y = generate_dataset(0.0, rep, spec);
        RLSurface surf = scan_rl_surface(bundle, y);
        double best_period_story = -std::numeric_limits<double>::infinity();
        double best_cohort_story = -std::numeric_limits<double>::infinity();
        for (const SurfaceMaximum& sm : surf.local_maxima) {
            double& slot =
                sm.sigma2_re[0] > sm.sigma2_re[1] ? best_period_story : best_cohort_story;
            slot = std::max(slot, sm.value);
        }
        if (!std::isfinite(best_period_story) || !std::isfinite(best_cohort_story)) {
            bimodal = false;
            bad = "replicate " + std::to_string(rep) + " is missing one of the two stories";
            break;
        }
        double gap = best_period_story - best_cohort_story;
        min_gap = std::min(min_gap, gap);
        if (gap <= 5.0) {
            bimodal = false;
            bad = "replicate " + std::to_string(rep) + " gap " + fmt_short(gap);
        }
    }
    report("two well-separated likelihood maxima at zero curvature", bimodal,
           bimodal ? "100 replicates, smallest story gap " + fmt_short(min_gap) + " log units"
                   : bad);
}

void check_single_re_fits() {
    Grid g = build_grid(6, 5);
    DesignBundle bundle = build_model(g, {Factor::cohort});
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        CounterRng rng(1000 + static_cast<std::uint64_t>(trial));
        Eigen::VectorXd y(g.n());
        for (int r = 0; r < g.n(); ++r) y[r] = rng.next_normal();
        FittedModel fit = fit_re_apc(bundle, y, StartPolicy::multistart_global);
        const EffectDecomposition& d = fit.effects.block("cohort").decomposition;
        worst = std::max({worst, std::abs(d.level), std::abs(d.linear_slope)});
        if (std::abs(d.level) >= 1e-6 || std::abs(d.linear_slope) >= 1e-6) ok = false;
    }
    report("single random cohort block keeps zero level and slope", ok,
           "50 datasets, worst magnitude " + fmt_short(worst) + ", bound 1e-6");
}

void check_curvature_agreement() {
    Grid g = build_grid(6, 5);
    OrthoBasis ba = orthonormal_poly_basis(g.a);
    OrthoBasis bp = orthonormal_poly_basis(g.p);
    OrthoBasis bc = orthonormal_poly_basis(g.c);

    bool ok = true;
    double worst = 0.0;
    std::string why;
    for (std::uint64_t dataset = 0; dataset < 20 && ok; ++dataset) {
        CounterRng rng(500 + dataset);
        auto curve = [&](const OrthoBasis& basis) {
            Eigen::VectorXd values = Eigen::VectorXd::Zero(basis.n);
            for (int d = 2; d < std::min(basis.n, 5); ++d) {
                double sign = rng.next_double() < 0.5 ? -1.0 : 1.0;
                values += sign * (0.5 + rng.next_double()) * basis.B.col(d);
            }
            return values;
        };
        Eigen::VectorXd fa = curve(ba), fp = curve(bp), fc = curve(bc);
        CellData data;
        data.grid = g;
        data.y.resize(g.n());
        for (int r = 0; r < g.n(); ++r) {
            const Cell& cell = g.cells[static_cast<std::size_t>(r)];
            data.y[r] = 0.7 + fa[cell.i - 1] + fp[cell.j - 1] + fc[cell.k - 1] +
                        1e-4 * rng.next_normal();
        }

        SensitivityResult sens = sensitivity_fits(data, all_re_specs());
        for (const char* name : {"age", "period", "cohort"}) {
            const Eigen::VectorXd& ref = sens.fits[0].effects.block(name).decomposition.nonlinear;
            if (ref.norm() < 0.05) {
                ok = false;
                why = "degenerate reference curvature";
                break;
            }
            for (std::size_t s = 1; s < sens.fits.size(); ++s) {
                double rel = (sens.fits[s].effects.block(name).decomposition.nonlinear - ref)
                                 .norm() /
                             ref.norm();
                worst = std::max(worst, rel);
                if (rel >= 1e-4) {
                    ok = false;
                    why = std::string(name) + " disagrees on dataset " + std::to_string(dataset) +
                          " (" + fmt_short(rel) + ")";
                    break;
                }
            }
            if (!ok) break;
        }
    }
    report("curvature agreement across the six model choices", ok,
           ok ? "20 datasets, worst relative gap " + fmt_short(worst) + ", bound 1e-4" : why);
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(APCRE_CLI_BIN) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

std::string fresh_dir(int& counter) {
    std::string d = "/tmp/apcre_accept_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter++);
    fs::create_directories(d);
    return d;
}

void check_manifest_reruns() {
    int counter = 0;

    Grid g = build_grid(6, 5);
    Eigen::VectorXd y = generate_dataset(0.35, 1, SimSpec::defaults());
    std::string data_path = "/tmp/apcre_accept_data_" + std::to_string(::getpid()) + ".csv";
    atomic_write_file(data_path, cell_csv(g, y));

    std::vector<std::string> commands = {
        "design --a 4 --p 3 --re cohort",
        "verify --a-min 3 --a-max 4 --p-min 3 --p-max 3 --lambdas 0.5,5",
        "simulate --m-grid 0,1 --reps 2",
        "profile --m 1 --points 5",
        "decompose --a 6 --p 5",
        "fit --data " + data_path,
    };

    bool ok = true;
    std::string why;
    int files_compared = 0;
    for (const std::string& base : commands) {
        std::string d1 = fresh_dir(counter);
        std::string d2 = fresh_dir(counter);
        if (run_cli(base + " --out " + d1) != 0) {
            ok = false;
            why = "command failed: " + base;
            break;
        }
        if (run_cli("rerun --manifest " + d1 + "/manifest.json --out " + d2) != 0) {
            ok = false;
            why = "rerun failed: " + base;
            break;
        }
        nlohmann::json manifest = nlohmann::json::parse(read_file(d1 + "/manifest.json"));
        for (const auto& name : manifest["outputs"]) {
            std::string f = name.get<std::string>();
            if (read_file(d1 + "/" + f) != read_file(d2 + "/" + f)) {
                ok = false;
                why = "payload differs: " + f + " from " + base;
                break;
            }
            ++files_compared;
        }
        fs::remove_all(d1);
        fs::remove_all(d2);
        if (!ok) break;
    }
    fs::remove(data_path);
    report("manifest reruns reproduce every payload byte for byte", ok,
           ok ? std::to_string(files_compared) + " files across 6 commands" : why);
}

}  // namespace

int main() {
    check_design_sweep();
    check_rank_ladder();
    check_quadratic_split();
    check_transfer_identities();
    check_shrinkage_endpoints();
    check_single_re_fits();
    check_curvature_agreement();
    check_manifest_reruns();
    if (g_failures > 0) {
        std::printf("%d check(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all checks passed\n");
    return 0;
}
