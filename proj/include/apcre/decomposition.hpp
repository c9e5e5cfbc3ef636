#pragma once

#include <Eigen/Dense>

namespace apcre {

// Orthogonal split of an effect vector over its levels into a constant, a
// linear trend in the level index, and the residual. The three squared norms
// add up to the squared norm of the input.
struct EffectDecomposition {
    double level = 0.0;         // mean over levels
    double linear_slope = 0.0;  // least-squares slope on the centered index
    Eigen::VectorXd nonlinear;  // residual after removing level and trend
    double level_sq = 0.0;
    double linear_sq = 0.0;
    double nonlinear_sq = 0.0;
};

// Requires at least two levels.
EffectDecomposition decompose_effect(const Eigen::VectorXd& values);

}  // namespace apcre
