#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "apcre/grid.hpp"
#include "apcre/reml.hpp"

namespace apcre {

// Which factors are random; the rest stay fixed. One or two entries, held in
// age/period/cohort order.
struct ModelSpec {
    std::vector<Factor> random;

    std::string name() const;  // factor names joined with '+'
};

// The six one- and two-factor random choices, single factors first.
std::vector<ModelSpec> all_re_specs();

// Comma-, plus-, or space-separated factor names; rejects empty input,
// duplicates, and the all-three choice (that model has no fixed factor left
// to anchor it).
ModelSpec parse_model_spec(const std::string& text);

// Cell means on a complete grid, with optional positive precision weights: a
// cell's error variance is sigma2_e / weight.
struct CellData {
    Grid grid;
    Eigen::VectorXd y;
    Eigen::VectorXd weight;
    bool has_weights = false;
};

// Header age_index,period_index,value[,weight]; indices 1-based; exactly one
// row per cell of the implied a x p grid, in any order.
CellData parse_cell_csv(const std::string& text);
CellData read_cell_csv(const std::string& path);

// Inverse of the reader, without weights.
std::string cell_csv(const Grid& grid, const Eigen::VectorXd& y);

// Fits one model choice. Weights fold in by scaling the rows of the design
// and data by sqrt(weight), which keeps coefficients and variances on the
// original scale.
FittedModel fit_spec(const CellData& data, const ModelSpec& spec,
                     StartPolicy policy = StartPolicy::multistart_global);

struct SensitivityResult {
    Grid grid;
    std::vector<ModelSpec> specs;
    std::vector<FittedModel> fits;  // one per spec, same order
};

SensitivityResult sensitivity_fits(const CellData& data, const std::vector<ModelSpec>& specs,
                                   StartPolicy policy = StartPolicy::multistart_global);

// One column per model choice: the intercept and every effect value first,
// then level/slope/curvature-norm summary rows per effect.
std::string sensitivity_tsv(const SensitivityResult& result);

}  // namespace apcre
