#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "apcre/grid.hpp"
#include "apcre/reml.hpp"

namespace apcre {

// Synthetic cohort-signal experiment: each dataset is a unit linear cohort
// trend plus m times the quadratic cohort contrast plus Gaussian noise, and
// the fitted model keeps age fixed with period and cohort random.
struct SimSpec {
    int a = 6;
    int p = 5;
    std::vector<double> m_grid;      // quadratic magnitudes, each in [0, 1]
    int replicates = 100;
    double noise_sd = 0.01;
    double shrink_threshold = 1e-2;  // |fitted slope| below this counts as shrunk
    std::uint64_t seed = 5;

    static SimSpec defaults();  // m_grid = 0, 0.05, ..., 1
    void validate() const;
};

// y over the grid cells, with the noise stream keyed by (seed, bit pattern
// of m, replicate) so any single dataset can be regenerated without
// replaying the rest of the study.
Eigen::VectorXd generate_dataset(double m, int replicate, const SimSpec& spec);

struct ShrinkFlags {
    bool period = false;
    bool cohort = false;
};

// A block counts as shrunk when the fitted effect's absolute linear slope
// falls below the threshold; a variance pinned at zero always qualifies.
ShrinkFlags classify_shrinkage(const FittedModel& fit, const SimSpec& spec);

struct SimSummaryRow {
    double m = 0.0;
    int replicates = 0;
    int period_shrunk = 0;
    int cohort_shrunk = 0;
    double mean_age_slope = 0.0;
    double mean_period_slope = 0.0;
    double mean_cohort_slope = 0.0;
    int multiple_maxima = 0;  // fits whose start catalog reached distinct optima
    int fit_failures = 0;
};

// One row per m value; failed fits are counted, not fatal. Deterministic for
// a fixed (spec, policy).
std::vector<SimSummaryRow> run_shrinkage_study(const SimSpec& spec, StartPolicy policy);

std::string shrinkage_tsv(const std::vector<SimSummaryRow>& rows);

}  // namespace apcre
