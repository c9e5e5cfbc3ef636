#include "apcre/solver.hpp"

#include <cmath>
#include <limits>

#include "apcre/orthopoly.hpp"

namespace apcre {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_penalty_weight(double lam, Factor f) {
    if (std::isnan(lam) || lam < 0.0) {
        throw std::invalid_argument(std::string("invalid ridge weight for ") + factor_name(f));
    }
    if (lam == 0.0) {
        throw std::invalid_argument(std::string("zero ridge weight on random block ") +
                                    factor_name(f) + " leaves the system singular");
    }
}

struct ActiveSolve {
    std::vector<int> active;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    Eigen::MatrixXd Qa;
};

ActiveSolve factor_active(const Eigen::MatrixXd& Q, const Eigen::VectorXd& d,
                          double condition_limit) {
    if (d.size() != Q.cols()) {
        throw std::invalid_argument("penalty diagonal length does not match design columns");
    }
    ActiveSolve s;
    for (int c = 0; c < d.size(); ++c) {
        if (std::isnan(d[c]) || d[c] < 0.0) {
            throw std::invalid_argument("penalty diagonal entries must be >= 0");
        }
        if (d[c] < kInf) s.active.push_back(c);
    }
    s.Qa.resize(Q.rows(), static_cast<int>(s.active.size()));
    for (std::size_t idx = 0; idx < s.active.size(); ++idx) {
        s.Qa.col(static_cast<int>(idx)) = Q.col(s.active[idx]);
    }
    Eigen::MatrixXd normal = s.Qa.transpose() * s.Qa;
    for (std::size_t idx = 0; idx < s.active.size(); ++idx) {
        normal(static_cast<int>(idx), static_cast<int>(idx)) += d[s.active[idx]];
    }
    s.ldlt.compute(normal);
    // rcond alone can miss an exactly singular matrix (the solve-based norm
    // estimate stays bounded when a pivot is zero), so check the pivots too
    Eigen::VectorXd piv = s.ldlt.vectorD();
    double piv_max = piv.size() > 0 ? piv.maxCoeff() : 0.0;
    double piv_min = piv.size() > 0 ? piv.minCoeff() : 0.0;
    if (s.ldlt.info() != Eigen::Success || !(s.ldlt.rcond() > 1.0 / condition_limit) ||
        !(piv_min > piv_max / condition_limit)) {
        throw SingularSystemError("penalized normal matrix is singular or too ill-conditioned");
    }
    return s;
}

}  // namespace

double PenaltySpec::lambda_for(Factor f) const {
    auto it = lambda.find(f);
    if (it == lambda.end()) {
        throw std::invalid_argument(std::string("no ridge weight for random block ") +
                                    factor_name(f));
    }
    check_penalty_weight(it->second, f);
    return it->second;
}

Eigen::VectorXd PenaltySpec::diagonal(const DesignBundle& bundle) const {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(bundle.total_cols());
    int at = bundle.w_cols();
    for (std::size_t b = 0; b < bundle.re_blocks.size(); ++b) {
        const int cols = static_cast<int>(bundle.Z[b].cols());
        d.segment(at, cols).setConstant(lambda_for(bundle.re_blocks[b].factor));
        at += cols;
    }
    return d;
}

Eigen::VectorXd solve_penalized_theta(const Eigen::MatrixXd& Q, const Eigen::VectorXd& d,
                                      const Eigen::VectorXd& y, double condition_limit) {
    if (y.size() != Q.rows()) throw std::invalid_argument("response length does not match design rows");
    ActiveSolve s = factor_active(Q, d, condition_limit);
    Eigen::VectorXd theta_active = s.ldlt.solve(s.Qa.transpose() * y);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(Q.cols());
    for (std::size_t idx = 0; idx < s.active.size(); ++idx) {
        theta[s.active[idx]] = theta_active[static_cast<int>(idx)];
    }
    return theta;
}

Eigen::MatrixXd influence_matrix(const Eigen::MatrixXd& Q, const Eigen::VectorXd& d,
                                 double condition_limit) {
    ActiveSolve s = factor_active(Q, d, condition_limit);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Q.cols(), Q.rows());
    Eigen::MatrixXd m_active = s.ldlt.solve(s.Qa.transpose());
    for (std::size_t idx = 0; idx < s.active.size(); ++idx) {
        m.row(s.active[idx]) = m_active.row(static_cast<int>(idx));
    }
    return m;
}

double penalized_rss(const Eigen::MatrixXd& Q, const Eigen::VectorXd& d,
                     const Eigen::VectorXd& y, const Eigen::VectorXd& theta) {
    if (theta.size() != Q.cols() || y.size() != Q.rows() || d.size() != Q.cols()) {
        throw std::invalid_argument("penalized_rss: dimension mismatch");
    }
    double value = (y - Q * theta).squaredNorm();
    for (int c = 0; c < d.size(); ++c) {
        if (d[c] == kInf) {
            if (theta[c] != 0.0) return kInf;
        } else {
            value += d[c] * theta[c] * theta[c];
        }
    }
    return value;
}

namespace {

Eigen::VectorXd block_values(Coding coding, int levels, const Eigen::VectorXd& coef) {
    switch (coding) {
        case Coding::identity:
            return coef;
        case Coding::sum_to_zero: {
            Eigen::VectorXd v(levels);
            v.head(levels - 1) = coef;
            v[levels - 1] = -coef.sum();
            return v;
        }
        case Coding::orthopoly: {
            OrthoBasis basis = orthonormal_poly_basis(levels);
            if (coef.size() == levels) return basis.B * coef;
            // nonconstant columns only (fixed-effect block next to an intercept)
            return basis.B.rightCols(levels - 1) * coef;
        }
    }
    throw std::invalid_argument("unknown coding");
}

BlockEstimate make_block(const std::string& name, bool random, Coding coding, int levels,
                         const Eigen::VectorXd& coef) {
    BlockEstimate b;
    b.name = name;
    b.random = random;
    b.coefficients = coef;
    b.values = block_values(coding, levels, coef);
    b.decomposition = decompose_effect(b.values);
    return b;
}

}  // namespace

const BlockEstimate& EffectEstimate::block(const std::string& name) const {
    for (const auto& b : blocks) {
        if (b.name == name) return b;
    }
    throw std::invalid_argument("no block named " + name);
}

EffectEstimate solve_penalized(const DesignBundle& bundle, const PenaltySpec& penalty,
                               const Eigen::VectorXd& y) {
    Eigen::MatrixXd q = bundle.combined();
    Eigen::VectorXd d = penalty.diagonal(bundle);
    EffectEstimate est;
    est.theta = solve_penalized_theta(q, d, y);

    BlockEstimate intercept;
    intercept.name = "intercept";
    intercept.random = false;
    intercept.coefficients = est.theta.head(1);
    intercept.values = intercept.coefficients;
    intercept.decomposition.level = est.theta[0];
    intercept.decomposition.level_sq = est.theta[0] * est.theta[0];
    est.blocks.push_back(std::move(intercept));

    for (const auto& block : bundle.fe_blocks) {
        est.blocks.push_back(make_block(factor_name(block.factor), false, block.coding,
                                        block.levels,
                                        est.theta.segment(block.col_begin, block.cols)));
    }
    int at = bundle.w_cols();
    for (std::size_t b = 0; b < bundle.re_blocks.size(); ++b) {
        const auto& block = bundle.re_blocks[b];
        est.blocks.push_back(make_block(factor_name(block.factor), true, block.coding,
                                        block.levels, est.theta.segment(at, block.cols)));
        at += block.cols;
    }

    est.rss = (y - q * est.theta).squaredNorm();
    est.penalty_value = 0.0;
    for (int c = 0; c < d.size(); ++c) {
        if (d[c] < std::numeric_limits<double>::infinity()) {
            est.penalty_value += d[c] * est.theta[c] * est.theta[c];
        }
    }
    return est;
}

TransferResult constraint_transfer(const Eigen::VectorXd& beta_star,
                                   const Eigen::VectorXd& u_star, int c) {
    if (c < 2) throw std::invalid_argument("constraint_transfer requires c >= 2");
    if (u_star.size() != c) {
        throw std::invalid_argument("constraint_transfer: u_star must have one entry per level");
    }
    if (beta_star.size() < 3) {
        throw std::invalid_argument(
            "constraint_transfer: beta_star needs intercept and two linear columns");
    }

    double ss = 0.0;
    for (int l = 1; l <= c; ++l) {
        double x = l - 0.5 * (c + 1);
        ss += x * x;
    }
    const double k = 1.0 / std::sqrt(static_cast<double>(c));
    const double q = 1.0 / std::sqrt(ss);

    TransferResult out;
    out.beta = beta_star;
    out.u = u_star;
    out.beta[0] += k * u_star[0];   // block level folds into the intercept
    out.beta[1] -= q * u_star[1];   // block trend splits across the two
    out.beta[2] += q * u_star[1];   // linear scores: cohort = period - age
    out.u[0] = 0.0;
    out.u[1] = 0.0;
    out.penalty_drop = u_star[0] * u_star[0] + u_star[1] * u_star[1];
    return out;
}

}  // namespace apcre
