#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <stdexcept>

#include "apcre/design.hpp"
#include "apcre/diagnostics.hpp"
#include "apcre/grid.hpp"
#include "apcre/solver.hpp"
#include "doctest.h"

using namespace apcre;

TEST_CASE("sweep visits every grid and weight in order and certifies the bound") {
    VerificationReport rep = verify_single_re_sweep(3, 4, 3, 3, {0.1, 1.0});
    REQUIRE(rep.rows.size() == 4);
    CHECK(rep.rows[0].a == 3);
    CHECK(rep.rows[0].p == 3);
    CHECK(rep.rows[0].lambda == 0.1);
    CHECK(rep.rows[1].lambda == 1.0);
    CHECK(rep.rows[2].a == 4);
    CHECK(rep.rows[3].a == 4);

    CHECK(rep.pass);
    double worst_lin = 0.0, worst_int = 0.0;
    for (const SweepRow& r : rep.rows) {
        CHECK(r.max_abs_linear <= rep.tolerance);
        CHECK(r.max_abs_intercept <= rep.tolerance);
        worst_lin = std::max(worst_lin, r.max_abs_linear);
        worst_int = std::max(worst_int, r.max_abs_intercept);
    }
    CHECK(rep.overall_max_linear == worst_lin);
    CHECK(rep.overall_max_intercept == worst_int);
}

TEST_CASE("sweep bound matches a direct influence-matrix computation") {
    Grid g = build_grid(3, 4);
    DesignBundle bundle = build_model(g, {Factor::cohort});
    PenaltySpec penalty;
    penalty.lambda[Factor::cohort] = 0.7;
    Eigen::MatrixXd m = influence_matrix(bundle.combined(), penalty.diagonal(bundle));
    Eigen::MatrixXd m_re = m.middleRows(bundle.w_cols(), g.c);

    Eigen::VectorXd x(g.c);
    for (int l = 0; l < g.c; ++l) x[l] = (l + 1) - 0.5 * (g.c + 1);
    Eigen::RowVectorXd level_row = m_re.colwise().mean();
    Eigen::RowVectorXd slope_row = (x / x.squaredNorm()).transpose() * m_re;

    VerificationReport rep = verify_single_re_sweep(3, 3, 4, 4, {0.7});
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].max_abs_intercept ==
          doctest::Approx(level_row.cwiseAbs().maxCoeff()).epsilon(1e-10));
    CHECK(rep.rows[0].max_abs_linear ==
          doctest::Approx(slope_row.cwiseAbs().maxCoeff()).epsilon(1e-10));
}

TEST_CASE("the pinned level and slope hold for any single random factor") {
    for (Factor f : {Factor::age, Factor::period, Factor::cohort}) {
        VerificationReport rep = verify_single_re_sweep(3, 3, 3, 3, {1.0}, f);
        CHECK(rep.pass);
    }
}

TEST_CASE("sweep arguments are validated") {
    CHECK_THROWS_AS(verify_single_re_sweep(1, 3, 3, 3, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(verify_single_re_sweep(4, 3, 3, 3, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(verify_single_re_sweep(3, 3, 3, 31, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(verify_single_re_sweep(3, 3, 3, 3, {}), std::invalid_argument);
    CHECK_THROWS_AS(verify_single_re_sweep(3, 3, 3, 3, {0.0}), std::invalid_argument);
    CHECK_THROWS_AS(verify_single_re_sweep(3, 3, 3, 3, {-2.0}), std::invalid_argument);
    CHECK_THROWS_AS(verify_single_re_sweep(3, 3, 3, 3, {1.0}, Factor::cohort, 0.0),
                    std::invalid_argument);
}

TEST_CASE("sweep report renders one csv row per entry") {
    VerificationReport rep = verify_single_re_sweep(3, 3, 3, 4, {1.0});
    std::string csv = sweep_report_csv(rep);
    CHECK(csv.rfind("a,p,lambda,max_abs_linear,max_abs_intercept\n", 0) == 0);
    int lines = 0;
    for (char ch : csv) {
        if (ch == '\n') ++lines;
    }
    CHECK(lines == 1 + int(rep.rows.size()));
}

TEST_CASE("quadratic split on the 6x5 grid reproduces the known shares") {
    QuadDecomposition qd = quadratic_decomposition(build_grid(6, 5));
    CHECK(qd.total_sq == doctest::Approx(1304.0 / 528.0).epsilon(1e-9));
    CHECK(qd.intercept_sq == doctest::Approx(10000.0 / 15840.0).epsilon(1e-9));
    CHECK(qd.age_sq == doctest::Approx(35.0 / 99.0).epsilon(1e-9));
    CHECK(qd.period_sq == doctest::Approx(7.0 / 44.0).epsilon(1e-9));
    CHECK(qd.cohort_residual_sq == doctest::Approx(21000.0 / 15840.0).epsilon(1e-9));
    CHECK(qd.frac_intercept_age == doctest::Approx(15600.0 / 39120.0).epsilon(1e-9));
    CHECK(qd.frac_period == doctest::Approx(2520.0 / 39120.0).epsilon(1e-9));
    CHECK(qd.frac_cohort == doctest::Approx(21000.0 / 39120.0).epsilon(1e-9));
}

TEST_CASE("quadratic split pieces always add up to the total") {
    for (auto [a, p] : {std::pair{3, 3}, {4, 6}, {6, 5}, {8, 11}}) {
        QuadDecomposition qd = quadratic_decomposition(build_grid(a, p));
        double sum = qd.intercept_sq + qd.age_sq + qd.period_sq + qd.cohort_residual_sq;
        CHECK(sum == doctest::Approx(qd.total_sq).epsilon(1e-12));
        CHECK(qd.frac_intercept_age + qd.frac_period + qd.frac_cohort ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(qd.cohort_residual_sq > 0.0);
    }
}

TEST_CASE("quadratic split csv lists the pieces with their shares") {
    std::string csv = quad_decomposition_csv(quadratic_decomposition(build_grid(6, 5)));
    CHECK(csv.rfind("piece,value,fraction_of_total\n", 0) == 0);
    CHECK(csv.find("\ntotal,") != std::string::npos);
    CHECK(csv.find("\nintercept,") != std::string::npos);
    CHECK(csv.find("\nage,") != std::string::npos);
    CHECK(csv.find("\nperiod,") != std::string::npos);
    CHECK(csv.find("\ncohort_residual,") != std::string::npos);
}

TEST_CASE("transfer identities hold over many random coefficient draws") {
    Grid g = build_grid(6, 5);
    TransferCheckResult r = transfer_property_check(g, 200, 5);
    CHECK(r.pass);
    CHECK(r.trials == 200);
    CHECK(r.worst_fit_rel_err <= r.tolerance);
    CHECK(r.worst_penalty_err <= r.tolerance);
    CHECK(r.first_failure_trial == -1);

    TransferCheckResult again = transfer_property_check(g, 200, 5);
    CHECK(again.worst_fit_rel_err == r.worst_fit_rel_err);
    CHECK(again.worst_penalty_err == r.worst_penalty_err);

    CHECK_THROWS_AS(transfer_property_check(g, 0, 5), std::invalid_argument);
}
