#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "apcre/grid.hpp"

namespace apcre {

enum class Coding { sum_to_zero, identity, orthopoly };

const char* coding_name(Coding c);

struct FactorBlock {
    Factor factor;
    Coding coding;
    int levels = 0;
    int col_begin = 0;  // within the owning matrix (W or the block's Z)
    int cols = 0;
    std::vector<std::string> labels;
};

// Fixed-effect matrix W (intercept first) plus any random-effect blocks Z.
struct DesignBundle {
    Grid grid;
    Eigen::MatrixXd W;
    std::vector<FactorBlock> fe_blocks;  // excludes the intercept column
    std::vector<FactorBlock> re_blocks;  // one per entry of Z, col_begin within Z[b]
    std::vector<Eigen::MatrixXd> Z;
    Coding fe_coding = Coding::sum_to_zero;

    int n() const { return static_cast<int>(W.rows()); }
    int w_cols() const { return static_cast<int>(W.cols()); }
    int z_cols() const;
    int total_cols() const { return w_cols() + z_cols(); }
    std::vector<Factor> re_factors() const;
    Eigen::MatrixXd combined() const;  // [W | Z_0 | Z_1 | ...]
};

// W = [intercept | one block per requested factor] in age, period, cohort
// order. Sum-to-zero coding drops each factor's last level (its row is -1
// across the block); orthopoly coding uses the nonconstant orthonormal
// polynomial columns.
DesignBundle fe_design(const Grid& grid, const std::vector<Factor>& factors,
                       Coding coding = Coding::sum_to_zero);

// Indicator matrix with one column per level of the factor.
Eigen::MatrixXd re_design(const Grid& grid, Factor factor);

// Mixed design: the FE part holds the intercept plus every factor not listed
// in re_factors (sum-to-zero); each listed factor becomes an identity random
// block. Blocks appear in age, period, cohort order on both sides.
DesignBundle build_model(const Grid& grid, const std::vector<Factor>& re_factors);

// Orthonormal basis of the numerical null space (SVD, relative tolerance).
Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& M, double tol = 1e-10);

int numerical_rank(const Eigen::MatrixXd& M, double tol = 1e-10);
int rank_deficiency(const Eigen::MatrixXd& M, double tol = 1e-10);

// True when every row of the block sums to one, i.e. the block's columns add
// up to the intercept column and the combined design cannot separate them.
bool intercept_redundancy_check(const Eigen::MatrixXd& Z);

// Comma-separated values, no header, %.17g fields, one line per grid cell.
std::string matrix_csv(const Eigen::MatrixXd& M);
void write_matrix_csv(const Eigen::MatrixXd& M, const std::string& path);

}  // namespace apcre
