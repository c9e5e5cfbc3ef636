#pragma once

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "apcre/decomposition.hpp"
#include "apcre/design.hpp"

namespace apcre {

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ridge weight per random block. Weights must be positive; +infinity pins the
// whole block at zero. A zero weight on a random block would leave the
// normal matrix singular, so it is rejected up front; use the fixed-effect
// path for an unpenalized factor.
struct PenaltySpec {
    std::map<Factor, double> lambda;

    double lambda_for(Factor f) const;
    // Penalty diagonal for bundle.combined(): zero on fixed columns.
    Eigen::VectorXd diagonal(const DesignBundle& bundle) const;
};

// theta = argmin ||y - Q theta||^2 + theta' diag(d) theta. Entries of d must
// be >= 0 and may be +infinity (coefficient pinned at zero). Throws
// SingularSystemError when the penalized normal matrix has an estimated
// condition number beyond condition_limit.
Eigen::VectorXd solve_penalized_theta(const Eigen::MatrixXd& Q, const Eigen::VectorXd& d,
                                      const Eigen::VectorXd& y, double condition_limit = 1e12);

// M = (Q'Q + diag(d))^-1 Q', so theta = M y. Rows for pinned columns are zero.
Eigen::MatrixXd influence_matrix(const Eigen::MatrixXd& Q, const Eigen::VectorXd& d,
                                 double condition_limit = 1e12);

// ||y - Q theta||^2 + theta' diag(d) theta (+infinity if theta is nonzero on
// a pinned coordinate).
double penalized_rss(const Eigen::MatrixXd& Q, const Eigen::VectorXd& d,
                     const Eigen::VectorXd& y, const Eigen::VectorXd& theta);

struct BlockEstimate {
    std::string name;  // intercept, age, period, cohort
    bool random = false;
    Eigen::VectorXd coefficients;  // raw coefficients in the block's coding
    Eigen::VectorXd values;        // effect value per level
    EffectDecomposition decomposition;
};

struct EffectEstimate {
    Eigen::VectorXd theta;  // stacked coefficients for [W | Z...]
    std::vector<BlockEstimate> blocks;
    double rss = 0.0;
    double penalty_value = 0.0;

    const BlockEstimate& block(const std::string& name) const;
};

EffectEstimate solve_penalized(const DesignBundle& bundle, const PenaltySpec& penalty,
                               const Eigen::VectorXd& y);

// Moves the level and linear coefficients of an orthopoly cohort block into
// the fixed intercept and the two linear-score columns. beta_star is laid
// out (intercept, age linear, period linear, ...); u_star has one entry per
// cohort polynomial component. The fitted values are unchanged and the block
// penalty drops by exactly u0^2 + u1^2.
struct TransferResult {
    Eigen::VectorXd beta;
    Eigen::VectorXd u;
    double penalty_drop = 0.0;
};

TransferResult constraint_transfer(const Eigen::VectorXd& beta_star,
                                   const Eigen::VectorXd& u_star, int c);

}  // namespace apcre
