#include "apcre/diagnostics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "apcre/io_util.hpp"
#include "apcre/orthopoly.hpp"
#include "apcre/rng.hpp"
#include "apcre/solver.hpp"

namespace apcre {

VerificationReport verify_single_re_sweep(int a_min, int a_max, int p_min, int p_max,
                                          const std::vector<double>& lambdas, Factor re_factor,
                                          double tolerance) {
    if (a_min < 2 || p_min < 2 || a_max > 30 || p_max > 30 || a_min > a_max || p_min > p_max) {
        throw std::invalid_argument("sweep ranges must satisfy 2 <= min <= max <= 30");
    }
    if (lambdas.empty()) throw std::invalid_argument("sweep needs at least one ridge weight");
    for (double l : lambdas) {
        if (!(l > 0.0) || !std::isfinite(l)) {
            throw std::invalid_argument("sweep ridge weights must be positive and finite");
        }
    }
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

    VerificationReport report;
    report.re_factor = re_factor;
    report.tolerance = tolerance;
    report.rows.reserve(static_cast<std::size_t>(a_max - a_min + 1) *
                        static_cast<std::size_t>(p_max - p_min + 1) * lambdas.size());

    for (int a = a_min; a <= a_max; ++a) {
        for (int p = p_min; p <= p_max; ++p) {
            Grid grid = build_grid(a, p);
            DesignBundle bundle = build_model(grid, {re_factor});
            Eigen::MatrixXd q = bundle.combined();
            Eigen::MatrixXd qtq = q.transpose() * q;

            const int levels = grid.levels(re_factor);
            const int col0 = bundle.w_cols();  // single random block follows W
            const int total = bundle.total_cols();

            // mean functional and centered-linear functional on the block
            Eigen::VectorXd alpha = Eigen::VectorXd::Zero(total);
            Eigen::VectorXd beta = Eigen::VectorXd::Zero(total);
            double center = 0.5 * (levels + 1);
            double ss = 0.0;
            for (int l = 0; l < levels; ++l) {
                double x = (l + 1) - center;
                ss += x * x;
            }
            for (int l = 0; l < levels; ++l) {
                alpha[col0 + l] = 1.0 / levels;
                beta[col0 + l] = ((l + 1) - center) / ss;
            }

            for (double lambda : lambdas) {
                Eigen::MatrixXd normal = qtq;
                normal.diagonal().segment(col0, levels).array() += lambda;
                Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
                if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-12)) {
                    std::ostringstream msg;
                    msg << "penalized normal matrix ill conditioned at a=" << a << " p=" << p
                        << " lambda=" << lambda;
                    throw SingularSystemError(msg.str());
                }
                // alpha' M = (N^-1 alpha)' Q' since N is symmetric
                Eigen::VectorXd row_intercept = q * ldlt.solve(alpha);
                Eigen::VectorXd row_linear = q * ldlt.solve(beta);

                SweepRow row;
                row.a = a;
                row.p = p;
                row.lambda = lambda;
                row.max_abs_linear = row_linear.cwiseAbs().maxCoeff();
                row.max_abs_intercept = row_intercept.cwiseAbs().maxCoeff();
                report.overall_max_linear = std::max(report.overall_max_linear, row.max_abs_linear);
                report.overall_max_intercept =
                    std::max(report.overall_max_intercept, row.max_abs_intercept);
                report.rows.push_back(row);
            }
        }
    }

    report.pass =
        report.overall_max_linear <= tolerance && report.overall_max_intercept <= tolerance;
    return report;
}

std::string sweep_report_csv(const VerificationReport& report) {
    std::string out = "a,p,lambda,max_abs_linear,max_abs_intercept\n";
    for (const SweepRow& r : report.rows) {
        out += std::to_string(r.a);
        out += ',';
        out += std::to_string(r.p);
        out += ',';
        out += fmt_full(r.lambda);
        out += ',';
        out += fmt_full(r.max_abs_linear);
        out += ',';
        out += fmt_full(r.max_abs_intercept);
        out += '\n';
    }
    return out;
}

QuadDecomposition quadratic_decomposition(const Grid& grid) {
    if (grid.c < 3) {
        throw std::invalid_argument("quadratic decomposition needs at least three cohort levels");
    }
    OrthoBasis basis = orthonormal_poly_basis(grid.c);

    // quadratic contrast value of each cell's cohort
    const int n = grid.n();
    Eigen::VectorXd v(n);
    for (int r = 0; r < n; ++r) v[r] = basis.B(grid.cells[static_cast<std::size_t>(r)].k - 1, 2);

    double grand = v.mean();
    Eigen::VectorXd age_mean = Eigen::VectorXd::Zero(grid.a);
    Eigen::VectorXd period_mean = Eigen::VectorXd::Zero(grid.p);
    for (int r = 0; r < n; ++r) {
        const Cell& cell = grid.cells[static_cast<std::size_t>(r)];
        age_mean[cell.i - 1] += v[r];
        period_mean[cell.j - 1] += v[r];
    }
    age_mean /= grid.p;
    period_mean /= grid.a;

    QuadDecomposition qd;
    qd.a = grid.a;
    qd.p = grid.p;
    qd.c = grid.c;
    qd.total_sq = v.squaredNorm();
    qd.intercept_sq = n * grand * grand;
    qd.age_sq = grid.p * (age_mean.array() - grand).square().sum();
    qd.period_sq = grid.a * (period_mean.array() - grand).square().sum();
    qd.cohort_residual_sq = qd.total_sq - qd.intercept_sq - qd.age_sq - qd.period_sq;
    qd.frac_intercept_age = (qd.intercept_sq + qd.age_sq) / qd.total_sq;
    qd.frac_period = qd.period_sq / qd.total_sq;
    qd.frac_cohort = qd.cohort_residual_sq / qd.total_sq;
    return qd;
}

std::string quad_decomposition_csv(const QuadDecomposition& qd) {
    std::string out = "piece,value,fraction_of_total\n";
    auto line = [&](const char* name, double value) {
        out += name;
        out += ',';
        out += fmt_full(value);
        out += ',';
        out += fmt_full(value / qd.total_sq);
        out += '\n';
    };
    line("total", qd.total_sq);
    line("intercept", qd.intercept_sq);
    line("age", qd.age_sq);
    line("period", qd.period_sq);
    line("cohort_residual", qd.cohort_residual_sq);
    return out;
}

TransferCheckResult transfer_property_check(const Grid& grid, int n_trials, std::uint64_t seed,
                                            double tolerance) {
    if (n_trials < 1) throw std::invalid_argument("need at least one trial");
    if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

    DesignBundle fe = fe_design(grid, {Factor::age, Factor::period});
    ReparamResult fe_rep = reparameterize_fe(fe.W, grid);
    Eigen::MatrixXd z = re_design(grid, Factor::cohort);
    ReparamResult re_rep = reparameterize_re(z, grid.c);

    const Eigen::MatrixXd& w_star = fe_rep.transformed;
    const Eigen::MatrixXd& z_star = re_rep.transformed;
    const int q = static_cast<int>(w_star.cols());

    TransferCheckResult result;
    result.trials = n_trials;
    result.tolerance = tolerance;
    result.pass = true;

    for (int t = 0; t < n_trials; ++t) {
        CounterRng rng(seed, static_cast<std::uint64_t>(t));
        Eigen::VectorXd beta(q);
        Eigen::VectorXd u(grid.c);
        for (int i = 0; i < q; ++i) beta[i] = rng.next_normal();
        for (int i = 0; i < grid.c; ++i) u[i] = rng.next_normal();

        Eigen::VectorXd fit_before = w_star * beta + z_star * u;
        TransferResult tr = constraint_transfer(beta, u, grid.c);
        Eigen::VectorXd fit_after = w_star * tr.beta + z_star * tr.u;

        double fit_rel = (fit_before - fit_after).norm() / std::max(fit_before.norm(), 1e-300);
        double penalty_err =
            std::abs((u.squaredNorm() - tr.u.squaredNorm()) - (u[0] * u[0] + u[1] * u[1]));

        result.worst_fit_rel_err = std::max(result.worst_fit_rel_err, fit_rel);
        result.worst_penalty_err = std::max(result.worst_penalty_err, penalty_err);
        if ((fit_rel > tolerance || penalty_err > tolerance) && result.pass) {
            result.pass = false;
            result.first_failure_trial = t;
        }
    }
    return result;
}

}  // namespace apcre
