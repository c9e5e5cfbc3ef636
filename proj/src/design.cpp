#include "apcre/design.hpp"

#include <algorithm>
#include <stdexcept>

#include "apcre/io_util.hpp"
#include "apcre/orthopoly.hpp"

namespace apcre {

const char* coding_name(Coding c) {
    switch (c) {
        case Coding::sum_to_zero: return "sum_to_zero";
        case Coding::identity: return "identity";
        case Coding::orthopoly: return "orthopoly";
    }
    throw std::invalid_argument("unknown coding");
}

int DesignBundle::z_cols() const {
    int total = 0;
    for (const auto& z : Z) total += static_cast<int>(z.cols());
    return total;
}

std::vector<Factor> DesignBundle::re_factors() const {
    std::vector<Factor> out;
    out.reserve(re_blocks.size());
    for (const auto& b : re_blocks) out.push_back(b.factor);
    return out;
}

Eigen::MatrixXd DesignBundle::combined() const {
    Eigen::MatrixXd q(n(), total_cols());
    q.leftCols(w_cols()) = W;
    int at = w_cols();
    for (const auto& z : Z) {
        q.middleCols(at, z.cols()) = z;
        at += static_cast<int>(z.cols());
    }
    return q;
}

namespace {

std::vector<Factor> canonical_factors(std::vector<Factor> factors, const char* who) {
    std::sort(factors.begin(), factors.end(),
              [](Factor a, Factor b) { return static_cast<int>(a) < static_cast<int>(b); });
    if (std::adjacent_find(factors.begin(), factors.end()) != factors.end()) {
        throw std::invalid_argument(std::string(who) + ": duplicate factor");
    }
    return factors;
}

std::vector<std::string> block_labels(Factor f, Coding coding, int levels) {
    std::vector<std::string> labels;
    if (coding == Coding::sum_to_zero) {
        for (int l = 1; l < levels; ++l) {
            labels.push_back(std::string(factor_name(f)) + ":" + std::to_string(l));
        }
    } else if (coding == Coding::identity) {
        for (int l = 1; l <= levels; ++l) {
            labels.push_back(std::string(factor_name(f)) + ":" + std::to_string(l));
        }
    } else {
        for (int d = 1; d < levels; ++d) {
            labels.push_back(std::string(factor_name(f)) + ":" + component_label(d));
        }
    }
    return labels;
}

}  // namespace

DesignBundle fe_design(const Grid& grid, const std::vector<Factor>& factors, Coding coding) {
    if (coding == Coding::identity) {
        throw std::invalid_argument("fe_design: identity coding is singular next to an intercept");
    }
    std::vector<Factor> fs = canonical_factors(factors, "fe_design");

    const int n = grid.n();
    int cols = 1;
    for (Factor f : fs) cols += grid.levels(f) - 1;

    DesignBundle bundle;
    bundle.grid = grid;
    bundle.fe_coding = coding;
    bundle.W = Eigen::MatrixXd::Zero(n, cols);
    bundle.W.col(0).setOnes();

    int at = 1;
    for (Factor f : fs) {
        const int levels = grid.levels(f);
        FactorBlock block;
        block.factor = f;
        block.coding = coding;
        block.levels = levels;
        block.col_begin = at;
        block.cols = levels - 1;
        block.labels = block_labels(f, coding, levels);

        if (coding == Coding::sum_to_zero) {
            for (int r = 0; r < n; ++r) {
                int l = grid.level(f, grid.cells[static_cast<std::size_t>(r)]);
                if (l < levels) {
                    bundle.W(r, at + l - 1) = 1.0;
                } else {
                    bundle.W.row(r).segment(at, levels - 1).setConstant(-1.0);
                }
            }
        } else {  // orthopoly: nonconstant polynomial columns of the level index
            OrthoBasis basis = orthonormal_poly_basis(levels);
            for (int r = 0; r < n; ++r) {
                int l = grid.level(f, grid.cells[static_cast<std::size_t>(r)]);
                for (int d = 1; d < levels; ++d) {
                    bundle.W(r, at + d - 1) = basis.B(l - 1, d);
                }
            }
        }
        bundle.fe_blocks.push_back(std::move(block));
        at += levels - 1;
    }
    return bundle;
}

Eigen::MatrixXd re_design(const Grid& grid, Factor factor) {
    const int n = grid.n();
    const int levels = grid.levels(factor);
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, levels);
    for (int r = 0; r < n; ++r) {
        z(r, grid.level(factor, grid.cells[static_cast<std::size_t>(r)]) - 1) = 1.0;
    }
    return z;
}

DesignBundle build_model(const Grid& grid, const std::vector<Factor>& re_factors) {
    std::vector<Factor> res = canonical_factors(re_factors, "build_model");
    std::vector<Factor> fes;
    for (Factor f : {Factor::age, Factor::period, Factor::cohort}) {
        if (std::find(res.begin(), res.end(), f) == res.end()) fes.push_back(f);
    }

    DesignBundle bundle = fe_design(grid, fes, Coding::sum_to_zero);
    for (Factor f : res) {
        const int levels = grid.levels(f);
        FactorBlock block;
        block.factor = f;
        block.coding = Coding::identity;
        block.levels = levels;
        block.col_begin = 0;
        block.cols = levels;
        block.labels = block_labels(f, Coding::identity, levels);
        bundle.re_blocks.push_back(std::move(block));
        bundle.Z.push_back(re_design(grid, f));
    }
    return bundle;
}

namespace {

Eigen::BDCSVD<Eigen::MatrixXd> svd_full_v(const Eigen::MatrixXd& m) {
    return Eigen::BDCSVD<Eigen::MatrixXd>(m, Eigen::ComputeThinU | Eigen::ComputeFullV);
}

int rank_from_svd(const Eigen::BDCSVD<Eigen::MatrixXd>& svd, double tol) {
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    double smax = sv[0];
    if (!(smax > 0.0)) return 0;
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv[i] > tol * smax) ++rank;
    }
    return rank;
}

}  // namespace

Eigen::MatrixXd null_space_basis(const Eigen::MatrixXd& M, double tol) {
    if (M.rows() < 1 || M.cols() < 1) throw std::invalid_argument("null_space_basis: empty matrix");
    auto svd = svd_full_v(M);
    int rank = rank_from_svd(svd, tol);
    int nullity = static_cast<int>(M.cols()) - rank;
    return svd.matrixV().rightCols(nullity);
}

int numerical_rank(const Eigen::MatrixXd& M, double tol) {
    if (M.rows() < 1 || M.cols() < 1) throw std::invalid_argument("numerical_rank: empty matrix");
    auto svd = svd_full_v(M);
    return rank_from_svd(svd, tol);
}

int rank_deficiency(const Eigen::MatrixXd& M, double tol) {
    return static_cast<int>(M.cols()) - numerical_rank(M, tol);
}

bool intercept_redundancy_check(const Eigen::MatrixXd& Z) {
    if (Z.rows() < 1 || Z.cols() < 1) return false;
    for (int r = 0; r < Z.rows(); ++r) {
        if (Z.row(r).sum() != 1.0) return false;
    }
    return true;
}

std::string matrix_csv(const Eigen::MatrixXd& M) {
    std::string out;
    out.reserve(static_cast<std::size_t>(M.rows()) * static_cast<std::size_t>(M.cols()) * 4);
    for (int r = 0; r < M.rows(); ++r) {
        for (int c = 0; c < M.cols(); ++c) {
            if (c > 0) out += ',';
            out += fmt_full(M(r, c));
        }
        out += '\n';
    }
    return out;
}

void write_matrix_csv(const Eigen::MatrixXd& M, const std::string& path) {
    atomic_write_file(path, matrix_csv(M));
}

}  // namespace apcre
