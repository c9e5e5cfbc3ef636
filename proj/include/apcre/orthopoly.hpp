#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "apcre/grid.hpp"

namespace apcre {

// Name for the polynomial component of a given degree: level, linear,
// quadratic, cubic, deg4, ...
std::string component_label(int degree);

// Orthonormal polynomial basis over level indices 1..n: column 0 is the
// constant 1/sqrt(n), column d the degree-d orthonormal polynomial of the
// centered index, signed so its own leading power enters positively. This
// reproduces the classical poly() contrasts exactly.
struct OrthoBasis {
    int n = 0;
    Eigen::MatrixXd B;  // n x n, orthogonal
    std::vector<std::string> component_labels;
};

OrthoBasis orthonormal_poly_basis(int n_levels);

// Centered linear scores per cell: age i - (a+1)/2, period j - (p+1)/2,
// cohort k - (c+1)/2. The cohort column equals period minus age exactly.
struct CellLinearColumns {
    Eigen::VectorXd age;
    Eigen::VectorXd period;
    Eigen::VectorXd cohort;
};

CellLinearColumns linear_contrast_columns(const Grid& grid);

struct ReparamResult {
    Eigen::MatrixXd transformed;  // original * transform
    Eigen::MatrixXd transform;
    std::vector<std::string> labels;
};

// Rewrites the fixed-effect matrix [1 | age | period] (sum-to-zero coding,
// a+p-1 columns) so the leading columns are the intercept and the two
// centered linear scores, with the remaining columns spanning only nonlinear
// age and period components. The transform is square and invertible.
ReparamResult reparameterize_fe(const Eigen::MatrixXd& W, const Grid& grid);

// Z -> Z * B for the block's orthonormal polynomial basis. B is orthogonal,
// so u and B'u have the same squared norm and the ridge penalty on the block
// is unchanged.
ReparamResult reparameterize_re(const Eigen::MatrixXd& Z, int n_levels);

}  // namespace apcre
