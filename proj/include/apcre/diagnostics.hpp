#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apcre/design.hpp"
#include "apcre/grid.hpp"

namespace apcre {

struct SweepRow {
    int a = 0;
    int p = 0;
    double lambda = 0.0;
    double max_abs_linear = 0.0;
    double max_abs_intercept = 0.0;
};

struct VerificationReport {
    Factor re_factor = Factor::cohort;
    double tolerance = 1e-9;
    std::vector<SweepRow> rows;  // ordered by (a, p, lambda)
    double overall_max_linear = 0.0;
    double overall_max_intercept = 0.0;
    bool pass = false;
};

// For every grid in the ranges and every ridge weight, builds the model with
// the single random factor and bounds how the fitted random block's mean and
// centered linear slope can respond to any data vector. With M the influence
// matrix, the mean is alpha'My and the slope beta'My, so the recorded maxima
// are the largest entries of |alpha'M| and |beta'M|. Values at rounding noise
// certify that the fit pins the block's level and slope to zero no matter
// what y is. Ranges must stay within 2..30 and every lambda must be a
// positive finite number.
VerificationReport verify_single_re_sweep(int a_min, int a_max, int p_min, int p_max,
                                          const std::vector<double>& lambdas,
                                          Factor re_factor = Factor::cohort,
                                          double tolerance = 1e-9);

// a,p,lambda,max_abs_linear,max_abs_intercept with header line
std::string sweep_report_csv(const VerificationReport& report);

// Squared length of the cohort quadratic contrast, spread over the cells of
// the grid, split by regressing that cell vector on the intercept and the
// full age and period effects. On a complete grid those projections are the
// centered row and column means, mutually orthogonal, so the pieces add up
// to the total exactly and the remainder is the part no age-period model can
// absorb.
struct QuadDecomposition {
    int a = 0;
    int p = 0;
    int c = 0;
    double total_sq = 0.0;
    double intercept_sq = 0.0;
    double age_sq = 0.0;
    double period_sq = 0.0;
    double cohort_residual_sq = 0.0;
    // shares of total_sq; the intercept is pooled with age because the two
    // are not separable once the block's mean shifts into the grand mean
    double frac_intercept_age = 0.0;
    double frac_period = 0.0;
    double frac_cohort = 0.0;
};

// Requires c >= 3 (no quadratic contrast below three cohort levels).
QuadDecomposition quadratic_decomposition(const Grid& grid);

std::string quad_decomposition_csv(const QuadDecomposition& qd);

// Draws random coefficient pairs (beta in the intercept/linear-score
// parameterization, u on the cohort polynomial basis), applies
// constraint_transfer, and checks both identities: the fitted values are
// unchanged (relative error) and the penalty drops by exactly u0^2 + u1^2
// (absolute error). Deterministic given (grid, n_trials, seed).
struct TransferCheckResult {
    bool pass = false;
    int trials = 0;
    double tolerance = 1e-10;
    double worst_fit_rel_err = 0.0;
    double worst_penalty_err = 0.0;
    int first_failure_trial = -1;
};

TransferCheckResult transfer_property_check(const Grid& grid, int n_trials, std::uint64_t seed,
                                            double tolerance = 1e-10);

}  // namespace apcre
