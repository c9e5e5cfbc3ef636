#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "apcre/design.hpp"
#include "apcre/grid.hpp"
#include "apcre/rng.hpp"
#include "apcre/solver.hpp"
#include "doctest.h"

using namespace apcre;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
    CounterRng rng(seed);
    Eigen::VectorXd v(n);
    for (int r = 0; r < n; ++r) v[r] = rng.next_normal();
    return v;
}

// reference minimizer: stack sqrt-penalty rows under the design and solve the
// plain least-squares problem by SVD
Eigen::VectorXd augmented_ls(const Eigen::MatrixXd& Q, const Eigen::VectorXd& d,
                             const Eigen::VectorXd& y) {
    Eigen::MatrixXd aug(Q.rows() + Q.cols(), Q.cols());
    aug.topRows(Q.rows()) = Q;
    aug.bottomRows(Q.cols()) = d.cwiseSqrt().asDiagonal();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(aug.rows());
    rhs.head(Q.rows()) = y;
    return aug.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
}

}  // namespace

TEST_CASE("zero data gives the zero estimate") {
    Grid g = build_grid(3, 3);
    DesignBundle b = build_model(g, {Factor::cohort});
    PenaltySpec penalty;
    penalty.lambda[Factor::cohort] = 1.0;
    EffectEstimate est = solve_penalized(b, penalty, Eigen::VectorXd::Zero(9));
    CHECK(est.theta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(est.rss == 0.0);
    CHECK(est.penalty_value == 0.0);
    CHECK(est.block("cohort").values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("penalized solve matches a dense augmented least-squares reference") {
    Grid g = build_grid(4, 3);
    DesignBundle b = build_model(g, {Factor::cohort});
    PenaltySpec penalty;
    penalty.lambda[Factor::cohort] = 10.0;
    Eigen::MatrixXd q = b.combined();
    Eigen::VectorXd d = penalty.diagonal(b);

    for (int hot = 0; hot < g.n(); ++hot) {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(g.n());
        y[hot] = 1.0;
        Eigen::VectorXd theta = solve_penalized_theta(q, d, y);
        Eigen::VectorXd ref = augmented_ls(q, d, y);
        CHECK((theta - ref).cwiseAbs().maxCoeff() < 1e-8);
    }
    Eigen::VectorXd y = random_vector(g.n(), 42);
    CHECK((solve_penalized_theta(q, d, y) - augmented_ls(q, d, y)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("influence matrix reproduces the solve and its column-by-column form") {
    Grid g = build_grid(5, 7);
    DesignBundle b = build_model(g, {Factor::cohort});
    PenaltySpec penalty;
    penalty.lambda[Factor::cohort] = 100.0;
    Eigen::MatrixXd q = b.combined();
    Eigen::VectorXd d = penalty.diagonal(b);

    Eigen::MatrixXd m = influence_matrix(q, d);
    REQUIRE(m.rows() == q.cols());
    REQUIRE(m.cols() == g.n());

    Eigen::VectorXd y = random_vector(g.n(), 3);
    CHECK((m * y - solve_penalized_theta(q, d, y)).cwiseAbs().maxCoeff() < 1e-10);

    for (int r = 0; r < g.n(); ++r) {
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(g.n());
        unit[r] = 1.0;
        CHECK((m.col(r) - solve_penalized_theta(q, d, unit)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("penalized residual objective: hand evaluation and minimizer property") {
    Grid g = build_grid(3, 3);
    DesignBundle b = build_model(g, {Factor::cohort});
    PenaltySpec penalty;
    penalty.lambda[Factor::cohort] = 2.5;
    Eigen::MatrixXd q = b.combined();
    Eigen::VectorXd d = penalty.diagonal(b);
    Eigen::VectorXd y = random_vector(g.n(), 9);

    Eigen::VectorXd theta = random_vector(int(q.cols()), 10);
    double by_hand = 0.0;
    Eigen::VectorXd resid = y - q * theta;
    for (int r = 0; r < resid.size(); ++r) by_hand += resid[r] * resid[r];
    for (int c = 0; c < d.size(); ++c) by_hand += d[c] * theta[c] * theta[c];
    CHECK(penalized_rss(q, d, y, theta) == doctest::Approx(by_hand).epsilon(1e-13));

    CHECK(penalized_rss(q, d, y, Eigen::VectorXd::Zero(q.cols())) ==
          doctest::Approx(y.squaredNorm()).epsilon(1e-13));

    Eigen::VectorXd theta_hat = solve_penalized_theta(q, d, y);
    double at_min = penalized_rss(q, d, y, theta_hat);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd bump = random_vector(int(q.cols()), 100 + std::uint64_t(trial));
        CHECK(penalized_rss(q, d, y, theta_hat + 0.1 * bump) >= at_min);
    }
}

TEST_CASE("ridge weights must be positive; zero and negative are rejected") {
    Grid g = build_grid(3, 3);
    DesignBundle b = build_model(g, {Factor::cohort});
    Eigen::VectorXd y = random_vector(g.n(), 1);

    PenaltySpec zero;
    zero.lambda[Factor::cohort] = 0.0;
    CHECK_THROWS_AS(solve_penalized(b, zero, y), std::invalid_argument);

    PenaltySpec negative;
    negative.lambda[Factor::cohort] = -1.0;
    CHECK_THROWS_AS(solve_penalized(b, negative, y), std::invalid_argument);

    PenaltySpec missing;
    CHECK_THROWS_AS(solve_penalized(b, missing, y), std::invalid_argument);

    Eigen::VectorXd bad_d = Eigen::VectorXd::Constant(b.total_cols(), -1.0);
    CHECK_THROWS_AS(solve_penalized_theta(b.combined(), bad_d, y), std::invalid_argument);
}

TEST_CASE("heavy shrinkage drives the random block to zero; infinite weight pins it") {
    Grid g = build_grid(6, 5);
    DesignBundle b = build_model(g, {Factor::cohort});
    Eigen::VectorXd y = random_vector(g.n(), 17);

    PenaltySpec heavy;
    heavy.lambda[Factor::cohort] = 1e9;
    EffectEstimate est = solve_penalized(b, heavy, y);
    CHECK(est.block("cohort").values.cwiseAbs().maxCoeff() < 1e-6);

    PenaltySpec pin;
    pin.lambda[Factor::cohort] = kInf;
    EffectEstimate pinned = solve_penalized(b, pin, y);
    CHECK(pinned.theta.tail(g.c).cwiseAbs().maxCoeff() == 0.0);
    CHECK(pinned.penalty_value == 0.0);

    // with the block pinned, the rest is the plain least-squares fit on W
    Eigen::VectorXd beta = b.W.colPivHouseholderQr().solve(y);
    CHECK((pinned.theta.head(b.w_cols()) - beta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("an unpenalized rank-deficient system is refused") {
    Grid g = build_grid(3, 3);
    Eigen::MatrixXd w = fe_design(g, {Factor::age, Factor::period, Factor::cohort}).W;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(w.cols());
    Eigen::VectorXd y = random_vector(g.n(), 2);
    CHECK_THROWS_AS(solve_penalized_theta(w, d, y), SingularSystemError);
    CHECK_THROWS_AS(influence_matrix(w, d), SingularSystemError);
}

TEST_CASE("block estimates carry names, level values, and decompositions") {
    Grid g = build_grid(4, 3);
    DesignBundle b = build_model(g, {Factor::cohort});
    PenaltySpec penalty;
    penalty.lambda[Factor::cohort] = 1.0;
    Eigen::VectorXd y = random_vector(g.n(), 23);
    EffectEstimate est = solve_penalized(b, penalty, y);

    REQUIRE(est.blocks.size() == 4);
    CHECK(est.blocks[0].name == "intercept");
    CHECK(!est.blocks[0].random);
    CHECK(est.block("age").values.size() == 4);
    CHECK(est.block("period").values.size() == 3);
    CHECK(est.block("cohort").values.size() == 6);
    CHECK(est.block("cohort").random);

    // sum-to-zero block: the last level closes the sum
    CHECK(est.block("age").values.sum() == doctest::Approx(0.0).epsilon(1e-12));
    // identity block: values are the coefficients themselves
    CHECK((est.block("cohort").values - est.theta.tail(g.c)).cwiseAbs().maxCoeff() == 0.0);

    // decomposition reconstructs each block's values
    for (const auto& blk : est.blocks) {
        if (blk.values.size() < 2) continue;
        const auto& dec = blk.decomposition;
        Eigen::VectorXd x(blk.values.size());
        for (int l = 0; l < x.size(); ++l) x[l] = (l + 1) - 0.5 * double(x.size() + 1);
        Eigen::VectorXd rebuilt =
            Eigen::VectorXd::Constant(x.size(), dec.level) + dec.linear_slope * x + dec.nonlinear;
        CHECK((rebuilt - blk.values).cwiseAbs().maxCoeff() < 1e-10);
    }

    CHECK(est.rss == doctest::Approx((y - b.combined() * est.theta).squaredNorm()).epsilon(1e-12));
    CHECK_THROWS_AS(est.block("epoch"), std::invalid_argument);
}

TEST_CASE("transfer moves the block level and trend into the anchored columns") {
    int c = 6;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(c);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(5);

    TransferResult same = constraint_transfer(beta, u, c);
    CHECK(same.beta.cwiseAbs().maxCoeff() == 0.0);
    CHECK(same.u.cwiseAbs().maxCoeff() == 0.0);
    CHECK(same.penalty_drop == 0.0);

    u[0] = 1.0;
    TransferResult lvl = constraint_transfer(beta, u, c);
    CHECK(lvl.beta[0] == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-14));
    CHECK(lvl.u[0] == 0.0);
    CHECK(lvl.penalty_drop == doctest::Approx(1.0).epsilon(1e-14));

    u.setZero();
    u[1] = 2.0;
    TransferResult trend = constraint_transfer(beta, u, c);
    double ss = 0.0;
    for (int l = 1; l <= c; ++l) ss += (l - 3.5) * (l - 3.5);
    CHECK(trend.beta[1] == doctest::Approx(-2.0 / std::sqrt(ss)).epsilon(1e-13));
    CHECK(trend.beta[2] == doctest::Approx(2.0 / std::sqrt(ss)).epsilon(1e-13));
    CHECK(trend.u[1] == 0.0);
    CHECK(trend.penalty_drop == doctest::Approx(4.0).epsilon(1e-14));

    CHECK_THROWS_AS(constraint_transfer(beta, u.head(3), c), std::invalid_argument);
    CHECK_THROWS_AS(constraint_transfer(beta.head(2), u, c), std::invalid_argument);
}
