#include "apcre/orthopoly.hpp"

#include <cmath>
#include <stdexcept>

namespace apcre {

std::string component_label(int degree) {
    switch (degree) {
        case 0: return "level";
        case 1: return "linear";
        case 2: return "quadratic";
        case 3: return "cubic";
        default: return "deg" + std::to_string(degree);
    }
}

OrthoBasis orthonormal_poly_basis(int n_levels) {
    if (n_levels < 1) throw std::invalid_argument("orthonormal_poly_basis requires n_levels >= 1");
    const int n = n_levels;
    OrthoBasis basis;
    basis.n = n;
    basis.B = Eigen::MatrixXd::Zero(n, n);
    basis.B.col(0).setConstant(1.0 / std::sqrt(static_cast<double>(n)));

    Eigen::VectorXd x(n);
    for (int l = 0; l < n; ++l) x[l] = (l + 1) - 0.5 * (n + 1);

    for (int d = 1; d < n; ++d) {
        Eigen::VectorXd v = x.array().pow(d).matrix();
        // two Gram-Schmidt passes for orthogonality near machine precision
        for (int pass = 0; pass < 2; ++pass) {
            for (int j = 0; j < d; ++j) {
                v -= basis.B.col(j).dot(v) * basis.B.col(j);
            }
        }
        double norm = v.norm();
        if (!(norm > 0.0)) throw std::runtime_error("degenerate polynomial basis column");
        basis.B.col(d) = v / norm;
    }

    basis.component_labels.reserve(n);
    for (int d = 0; d < n; ++d) basis.component_labels.push_back(component_label(d));
    return basis;
}

CellLinearColumns linear_contrast_columns(const Grid& grid) {
    const int n = grid.n();
    CellLinearColumns cols;
    cols.age.resize(n);
    cols.period.resize(n);
    cols.cohort.resize(n);
    for (int r = 0; r < n; ++r) {
        const Cell& cell = grid.cells[static_cast<std::size_t>(r)];
        cols.age[r] = cell.i - 0.5 * (grid.a + 1);
        cols.period[r] = cell.j - 0.5 * (grid.p + 1);
        cols.cohort[r] = cell.k - 0.5 * (grid.c + 1);
    }
    return cols;
}

ReparamResult reparameterize_fe(const Eigen::MatrixXd& W, const Grid& grid) {
    const int n = grid.n();
    const int q = grid.a + grid.p - 1;
    if (W.rows() != n || W.cols() != q) {
        throw std::invalid_argument("reparameterize_fe expects the [1 | age | period] matrix, " +
                                    std::to_string(n) + " x " + std::to_string(q));
    }

    CellLinearColumns lin = linear_contrast_columns(grid);
    OrthoBasis ba = orthonormal_poly_basis(grid.a);
    OrthoBasis bp = orthonormal_poly_basis(grid.p);

    Eigen::MatrixXd target(n, q);
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(q));
    target.col(0).setOnes();
    labels.push_back("intercept");
    target.col(1) = lin.age;
    labels.push_back("age:linear");
    target.col(2) = lin.period;
    labels.push_back("period:linear");
    int col = 3;
    for (int d = 2; d < grid.a; ++d, ++col) {
        for (int r = 0; r < n; ++r) {
            target(r, col) = ba.B(grid.cells[static_cast<std::size_t>(r)].i - 1, d);
        }
        labels.push_back("age:" + component_label(d));
    }
    for (int d = 2; d < grid.p; ++d, ++col) {
        for (int r = 0; r < n; ++r) {
            target(r, col) = bp.B(grid.cells[static_cast<std::size_t>(r)].j - 1, d);
        }
        labels.push_back("period:" + component_label(d));
    }

    // target columns all lie in span(W), so the least-squares map is exact
    Eigen::MatrixXd k = W.colPivHouseholderQr().solve(target);
    double resid = (W * k - target).cwiseAbs().maxCoeff();
    if (!(resid < 1e-8)) {
        throw std::runtime_error("reparameterize_fe: W does not span the requested columns");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(k);
    if (!lu.isInvertible()) {
        throw std::runtime_error("reparameterize_fe: singular transform");
    }

    ReparamResult result;
    result.transform = k;
    result.transformed = W * k;
    result.labels = std::move(labels);
    return result;
}

ReparamResult reparameterize_re(const Eigen::MatrixXd& Z, int n_levels) {
    if (Z.cols() != n_levels) {
        throw std::invalid_argument("reparameterize_re: Z must have one column per level");
    }
    OrthoBasis basis = orthonormal_poly_basis(n_levels);
    ReparamResult result;
    result.transform = basis.B;
    result.transformed = Z * basis.B;
    result.labels = basis.component_labels;
    return result;
}

}  // namespace apcre
