#include "apcre/decomposition.hpp"

#include <stdexcept>

namespace apcre {

EffectDecomposition decompose_effect(const Eigen::VectorXd& values) {
    const int n = static_cast<int>(values.size());
    if (n < 2) throw std::invalid_argument("decompose_effect requires at least two levels");

    Eigen::VectorXd x(n);
    for (int l = 0; l < n; ++l) x[l] = (l + 1) - 0.5 * (n + 1);
    double ss = x.squaredNorm();

    EffectDecomposition d;
    d.level = values.mean();
    d.linear_slope = x.dot(values) / ss;
    d.nonlinear = values - Eigen::VectorXd::Constant(n, d.level) - d.linear_slope * x;
    d.level_sq = n * d.level * d.level;
    d.linear_sq = d.linear_slope * d.linear_slope * ss;
    d.nonlinear_sq = d.nonlinear.squaredNorm();
    return d;
}

}  // namespace apcre
