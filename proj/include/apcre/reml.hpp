#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "apcre/design.hpp"
#include "apcre/solver.hpp"

namespace apcre {

struct VarianceComponents {
    double sigma2_e = 1.0;               // > 0
    std::map<Factor, double> sigma2_re;  // >= 0 per random factor

    double re(Factor f) const;
    // Ridge weight implied by the variance ratio; +infinity at sigma2_re = 0.
    double lambda_for(Factor f) const;
};

// Restricted log-likelihood of y under V = sigma2_e I + sum sigma2_b Z_b Z_b'.
// Convention:
//   value = -1/2 [ log|V| + log|W'V^-1 W| - log|W'W| + y'Py ]
// which is the log-density of any orthonormal error contrast K'y (K'W = 0)
// with the (n-q)/2 log(2 pi) constant dropped. The |W'W| term makes the
// value exactly invariant under invertible reparameterization of W.
double restricted_loglik(const VarianceComponents& vc, const DesignBundle& bundle,
                         const Eigen::VectorXd& y);

// Error-contrast form of the same likelihood, precomputed once per (design,
// data) pair: with K an orthonormal basis of the null space of W',
//   value = -1/2 [ log|sigma2_e I + sum s_b A_b| + w' (...)^-1 w ],
// where A_b = K'Z_b Z_b'K and w = K'y. Used by the profiler and optimizer.
class REMLContext {
  public:
    REMLContext(const DesignBundle& bundle, const Eigen::VectorXd& y);

    int n_re() const { return static_cast<int>(factors_.size()); }
    int n_contrasts() const { return static_cast<int>(w_.size()); }
    const std::vector<Factor>& factors() const { return factors_; }
    double contrast_norm2() const { return w_.squaredNorm(); }

    double loglik(double sigma2_e, const Eigen::VectorXd& sigma2_re) const;

    // max over sigma2_e > 0 at fixed block variances (exact 1-D search on the
    // eigenbasis of the block part of the contrast covariance)
    struct ProfileResult {
        double value = 0.0;
        double sigma2_e = 0.0;
    };
    ProfileResult profile(const Eigen::VectorXd& sigma2_re) const;

  private:
    std::vector<Factor> factors_;
    std::vector<Eigen::MatrixXd> A_;
    Eigen::VectorXd w_;
};

// Profiled restricted log-likelihood: max over sigma2_e of restricted_loglik
// at fixed block variances.
double profiled_rl(const DesignBundle& bundle, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& sigma2_re);
// Two-block convenience for the period+cohort random model.
double profiled_rl(double sigma2_p, double sigma2_c, const DesignBundle& bundle,
                   const Eigen::VectorXd& y);

struct OptimizerOptions {
    double rel_tol = 1e-8;
    int max_evals_per_start = 10000;
};

struct SurfaceMaximum {
    Eigen::VectorXd sigma2_re;  // per random block, bundle order
    double sigma2_e = 0.0;
    double value = 0.0;
    int basin_size = 0;  // grid starts that ascended here (surface scans)
};

// Profiled-RL surface over two random-block variances. Each axis is {0}
// followed by a log-spaced positive range; local maxima are refined by
// coordinate ascent started from every grid point and deduplicated at
// relative tolerance 1e-4.
struct SurfaceGridSpec {
    double min_positive = 1e-6;
    double max_positive = 1e2;
    int points = 9;  // log-spaced points between min and max inclusive
};

struct RLSurface {
    Factor factor_row;
    Factor factor_col;
    std::vector<double> axis_row;
    std::vector<double> axis_col;
    Eigen::MatrixXd values;  // axis_row.size() x axis_col.size()
    std::vector<SurfaceMaximum> local_maxima;  // sorted by value, best first
};

RLSurface scan_rl_surface(const DesignBundle& bundle, const Eigen::VectorXd& y,
                          const SurfaceGridSpec& grid_spec = {});

struct StartResult {
    VarianceComponents start;
    VarianceComponents optimum;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
};

struct REMLResult {
    VarianceComponents best;
    double best_value = 0.0;
    std::vector<SurfaceMaximum> maxima;  // distinct, sorted by value, best first
    std::vector<StartResult> starts;     // in input order
};

// Derivative-free coordinate search on the block variances with sigma2_e
// profiled out exactly. Each coordinate moves by multiplicative steps on a
// shrinking ladder; zero is always a candidate, and a coordinate sitting at
// zero probes a log-spaced range of departures before staying put. The
// sigma2_e entries of the starts are ignored (the profile determines them).
// Deterministic: identical inputs give identical output bit for bit.
REMLResult maximize_reml(const DesignBundle& bundle, const Eigen::VectorXd& y,
                         const std::vector<VarianceComponents>& starts,
                         const OptimizerOptions& opts = {});

// All-ones start first, then axis starts (one block at 1e-4 or 1, rest 0).
std::vector<VarianceComponents> default_starts(const std::vector<Factor>& re_factors);

enum class StartPolicy { default_ones, multistart_global };

const char* start_policy_name(StartPolicy p);
StartPolicy start_policy_from_name(const std::string& name);

struct FitConvergence {
    std::vector<StartResult> starts;
    int n_distinct_maxima = 0;
    bool multiple_maxima = false;
    int selected_start = -1;
    std::string note;
};

struct FittedModel {
    VarianceComponents variance;
    PenaltySpec penalty;
    EffectEstimate effects;
    double rl_value = 0.0;
    FitConvergence convergence;
};

// Two-step fit: maximize the restricted likelihood over the variances, then
// solve the ridge system at lambda_b = sigma2_e / sigma2_b. The optimizer
// always runs the full default start catalog; start_policy picks whether the
// all-ones start's optimum or the global best is carried into step two.
FittedModel fit_re_apc(const DesignBundle& bundle, const Eigen::VectorXd& y,
                       StartPolicy policy = StartPolicy::multistart_global,
                       const OptimizerOptions& opts = {});

}  // namespace apcre
