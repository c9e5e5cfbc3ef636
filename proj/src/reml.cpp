#include "apcre/reml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace apcre {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_vc(const VarianceComponents& vc, const std::vector<Factor>& re_factors) {
    if (!(vc.sigma2_e > 0.0) || !std::isfinite(vc.sigma2_e)) {
        throw std::invalid_argument("sigma2_e must be positive and finite");
    }
    for (Factor f : re_factors) {
        double s = vc.re(f);
        if (std::isnan(s) || !std::isfinite(s) || s < 0.0) {
            throw std::invalid_argument(std::string("sigma2 for random block ") + factor_name(f) +
                                        " must be finite and >= 0");
        }
    }
    for (const auto& [f, s] : vc.sigma2_re) {
        if (std::find(re_factors.begin(), re_factors.end(), f) == re_factors.end()) {
            throw std::invalid_argument(std::string("variance component for ") + factor_name(f) +
                                        " does not match any random block in the design");
        }
    }
}

double logdet_ldlt_pd(const Eigen::MatrixXd& m, const char* what) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success) {
        throw std::runtime_error(std::string("factorization failed for ") + what);
    }
    double acc = 0.0;
    const auto& d = ldlt.vectorD();
    for (int i = 0; i < d.size(); ++i) {
        if (!(d[i] > 0.0)) {
            throw std::runtime_error(std::string(what) + " is not positive definite");
        }
        acc += std::log(d[i]);
    }
    return acc;
}

}  // namespace

double VarianceComponents::re(Factor f) const {
    auto it = sigma2_re.find(f);
    if (it == sigma2_re.end()) {
        throw std::invalid_argument(std::string("no variance component for ") + factor_name(f));
    }
    return it->second;
}

double VarianceComponents::lambda_for(Factor f) const {
    double s = re(f);
    if (s == 0.0) return kInf;
    return sigma2_e / s;
}

double restricted_loglik(const VarianceComponents& vc, const DesignBundle& bundle,
                         const Eigen::VectorXd& y) {
    const int n = bundle.n();
    const int q = bundle.w_cols();
    if (y.size() != n) throw std::invalid_argument("response length does not match design rows");
    check_vc(vc, bundle.re_factors());
    if (Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(bundle.W).rank() < q) {
        throw std::invalid_argument("fixed-effect matrix is rank deficient");
    }

    Eigen::MatrixXd v = vc.sigma2_e * Eigen::MatrixXd::Identity(n, n);
    for (std::size_t b = 0; b < bundle.Z.size(); ++b) {
        double s = vc.re(bundle.re_blocks[b].factor);
        if (s > 0.0) v.noalias() += s * bundle.Z[b] * bundle.Z[b].transpose();
    }

    Eigen::LLT<Eigen::MatrixXd> llt(v);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("marginal covariance is not positive definite");
    }
    double logdet_v = 0.0;
    for (int i = 0; i < n; ++i) logdet_v += 2.0 * std::log(llt.matrixLLT()(i, i));

    Eigen::MatrixXd vinv_w = llt.solve(bundle.W);
    Eigen::MatrixXd s_mat = bundle.W.transpose() * vinv_w;
    double logdet_s = logdet_ldlt_pd(s_mat, "W'V^-1 W");
    double logdet_ww = logdet_ldlt_pd(bundle.W.transpose() * bundle.W, "W'W");

    Eigen::VectorXd vinv_y = llt.solve(y);
    Eigen::VectorXd wty = vinv_w.transpose() * y;
    Eigen::LDLT<Eigen::MatrixXd> s_ldlt(s_mat);
    double quad = y.dot(vinv_y) - wty.dot(s_ldlt.solve(wty));

    return -0.5 * (logdet_v + logdet_s - logdet_ww + quad);
}

// ---- error-contrast context -------------------------------------------------

REMLContext::REMLContext(const DesignBundle& bundle, const Eigen::VectorXd& y) {
    const int n = bundle.n();
    const int q = bundle.w_cols();
    if (y.size() != n) throw std::invalid_argument("response length does not match design rows");
    if (bundle.re_blocks.empty()) {
        throw std::invalid_argument("REMLContext requires at least one random block");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(bundle.W);
    if (qr.rank() < q) throw std::invalid_argument("fixed-effect matrix is rank deficient");
    if (n <= q) throw std::invalid_argument("no error contrasts: design saturates the data");

    Eigen::MatrixXd q_full = qr.householderQ();
    Eigen::MatrixXd k = q_full.rightCols(n - q);

    factors_ = bundle.re_factors();
    A_.reserve(bundle.Z.size());
    for (const auto& z : bundle.Z) {
        Eigen::MatrixXd g = k.transpose() * z;
        A_.push_back(g * g.transpose());
    }
    w_ = k.transpose() * y;
}

double REMLContext::loglik(double sigma2_e, const Eigen::VectorXd& sigma2_re) const {
    if (!(sigma2_e > 0.0)) throw std::invalid_argument("sigma2_e must be positive");
    if (sigma2_re.size() != n_re()) throw std::invalid_argument("wrong number of block variances");
    const int m = n_contrasts();
    Eigen::MatrixXd cov = sigma2_e * Eigen::MatrixXd::Identity(m, m);
    for (int b = 0; b < n_re(); ++b) {
        if (sigma2_re[b] > 0.0) cov.noalias() += sigma2_re[b] * A_[static_cast<std::size_t>(b)];
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("contrast covariance is not positive definite");
    }
    double logdet = 0.0;
    for (int i = 0; i < m; ++i) logdet += 2.0 * std::log(llt.matrixLLT()(i, i));
    double quad = w_.dot(llt.solve(w_));
    return -0.5 * (logdet + quad);
}

namespace {

// minimize g(v) = sum_i [ log(v + d_i) + z2_i / (v + d_i) ] over v > 0
struct InnerMin {
    double v;
    double g;
};

InnerMin minimize_profile_objective(const Eigen::VectorXd& d, const Eigen::VectorXd& z2) {
    const int m = static_cast<int>(d.size());
    auto g = [&](double v) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) {
            double w = v + d[i];
            acc += std::log(w) + z2[i] / w;
        }
        return acc;
    };

    const double s_mean = z2.sum() / m;
    if (d.maxCoeff() == 0.0) {
        // no block contribution: closed form
        return {s_mean, g(s_mean)};
    }

    // coarse log grid around the data scale
    const double t_center = std::log10(s_mean);
    const double t_step = 0.5;
    double best_t = t_center;
    double best_g = kInf;
    for (double t = t_center - 24.0; t <= t_center + 8.0 + 1e-9; t += t_step) {
        double val = g(std::pow(10.0, t));
        if (val < best_g) {
            best_g = val;
            best_t = t;
        }
    }

    // golden-section refinement in log10(v)
    double a = best_t - t_step;
    double b = best_t + t_step;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = g(std::pow(10.0, x1));
    double f2 = g(std::pow(10.0, x2));
    for (int it = 0; it < 90 && (b - a) > 1e-13; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = g(std::pow(10.0, x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = g(std::pow(10.0, x2));
        }
    }
    double v = std::pow(10.0, 0.5 * (a + b));

    // Newton polish on the derivative, kept inside a decade of the bracket
    for (int it = 0; it < 8; ++it) {
        double g1 = 0.0;
        double g2 = 0.0;
        for (int i = 0; i < m; ++i) {
            double w = v + d[i];
            g1 += 1.0 / w - z2[i] / (w * w);
            g2 += -1.0 / (w * w) + 2.0 * z2[i] / (w * w * w);
        }
        if (!(g2 > 0.0)) break;
        double nv = v - g1 / g2;
        if (!(nv > 0.0) || !std::isfinite(nv)) break;
        nv = std::clamp(nv, v / 10.0, v * 10.0);
        if (nv == v) break;
        v = nv;
    }
    return {v, g(v)};
}

}  // namespace

REMLContext::ProfileResult REMLContext::profile(const Eigen::VectorXd& sigma2_re) const {
    if (sigma2_re.size() != n_re()) throw std::invalid_argument("wrong number of block variances");
    for (int b = 0; b < n_re(); ++b) {
        if (std::isnan(sigma2_re[b]) || sigma2_re[b] < 0.0 || !std::isfinite(sigma2_re[b])) {
            throw std::invalid_argument("block variances must be finite and >= 0");
        }
    }
    if (contrast_norm2() <= 0.0) {
        throw std::runtime_error("degenerate data: error contrasts are identically zero");
    }

    const int m = n_contrasts();
    Eigen::VectorXd d;
    Eigen::VectorXd z;
    if (sigma2_re.maxCoeff() == 0.0) {
        d = Eigen::VectorXd::Zero(m);
        z = w_;
    } else {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(m, m);
        for (int b = 0; b < n_re(); ++b) {
            if (sigma2_re[b] > 0.0) c.noalias() += sigma2_re[b] * A_[static_cast<std::size_t>(b)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
        d = es.eigenvalues().cwiseMax(0.0);
        z = es.eigenvectors().transpose() * w_;
    }

    InnerMin inner = minimize_profile_objective(d, z.array().square());
    return ProfileResult{-0.5 * inner.g, inner.v};
}

double profiled_rl(const DesignBundle& bundle, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& sigma2_re) {
    REMLContext ctx(bundle, y);
    return ctx.profile(sigma2_re).value;
}

double profiled_rl(double sigma2_p, double sigma2_c, const DesignBundle& bundle,
                   const Eigen::VectorXd& y) {
    std::vector<Factor> fs = bundle.re_factors();
    if (fs != std::vector<Factor>{Factor::period, Factor::cohort}) {
        throw std::invalid_argument("profiled_rl(p, c, ...) expects period and cohort random blocks");
    }
    Eigen::Vector2d s(sigma2_p, sigma2_c);
    return profiled_rl(bundle, y, s);
}

// ---- coordinate ascent ------------------------------------------------------

namespace {

struct Ascent {
    Eigen::VectorXd s;
    double value = 0.0;
    double sigma2_e = 0.0;
    int evals = 0;
    bool converged = false;
};

Ascent coordinate_ascent(const REMLContext& ctx, Eigen::VectorXd s, const OptimizerOptions& opt) {
    Ascent out;
    auto pr = ctx.profile(s);
    double f = pr.value;
    double se = pr.sigma2_e;
    int evals = 1;
    bool budget_ok = true;

    auto try_point = [&](const Eigen::VectorXd& trial, double& val, double& se_out) {
        if (evals >= opt.max_evals_per_start) {
            budget_ok = false;
            return false;
        }
        auto tp = ctx.profile(trial);
        ++evals;
        val = tp.value;
        se_out = tp.sigma2_e;
        return true;
    };

    double factor = 10.0;
    while (budget_ok) {
        bool improved_pass = false;
        for (int b = 0; b < s.size() && budget_ok; ++b) {
            while (budget_ok) {
                std::vector<double> cand;
                if (s[b] > 0.0) {
                    cand = {s[b] * factor, s[b] / factor, 0.0};
                } else if (factor > 1.5) {
                    // departures from the zero boundary, scaled by the noise variance
                    double ref = se > 0.0 ? se : 1.0;
                    cand = {ref * 1e-8, ref * 1e-6, ref * 1e-4, ref * 1e-2, ref, ref * 1e2};
                } else {
                    break;
                }
                double best_val = f;
                double best_se = se;
                double best_x = s[b];
                bool moved = false;
                for (double x : cand) {
                    Eigen::VectorXd trial = s;
                    trial[b] = x;
                    double val = 0.0;
                    double tse = 0.0;
                    if (!try_point(trial, val, tse)) break;
                    if (val > best_val + 1e-13 * (1.0 + std::abs(best_val))) {
                        best_val = val;
                        best_se = tse;
                        best_x = x;
                        moved = true;
                    }
                }
                if (!moved) break;
                s[b] = best_x;
                f = best_val;
                se = best_se;
                improved_pass = true;
                if (s[b] == 0.0) break;
            }
        }
        if (!budget_ok) break;
        if (!improved_pass) {
            if (factor <= 1.0 + opt.rel_tol) {
                out.converged = true;
                break;
            }
            factor = std::sqrt(factor);
        }
    }

    // a coordinate that converged to a sliver above zero is the boundary in
    // all but name; snap it when the likelihood agrees
    for (int b = 0; b < s.size() && budget_ok; ++b) {
        if (s[b] > 0.0 && s[b] < 1e-8 * std::max(se, 1e-300)) {
            Eigen::VectorXd trial = s;
            trial[b] = 0.0;
            double val = 0.0;
            double tse = 0.0;
            if (try_point(trial, val, tse) && val >= f - 1e-9 * (1.0 + std::abs(f))) {
                s[b] = 0.0;
                f = val;
                se = tse;
            }
        }
    }

    out.s = std::move(s);
    out.value = f;
    out.sigma2_e = se;
    out.evals = evals;
    return out;
}

bool same_maximum(const SurfaceMaximum& a, const SurfaceMaximum& b) {
    double tiny = 1e-6 * std::max(std::max(a.sigma2_e, b.sigma2_e), 1e-300);
    for (int i = 0; i < a.sigma2_re.size(); ++i) {
        double big = std::max(std::abs(a.sigma2_re[i]), std::abs(b.sigma2_re[i]));
        if (big <= tiny) continue;
        if (std::abs(a.sigma2_re[i] - b.sigma2_re[i]) <= 1e-4 * big) continue;
        return false;
    }
    return true;
}

std::vector<SurfaceMaximum> merge_maxima(std::vector<SurfaceMaximum> found) {
    std::vector<SurfaceMaximum> out;
    for (auto& cand : found) {
        bool merged = false;
        for (auto& kept : out) {
            if (same_maximum(cand, kept)) {
                kept.basin_size += cand.basin_size;
                if (cand.value > kept.value) {
                    int basin = kept.basin_size;
                    kept = cand;
                    kept.basin_size = basin;
                }
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(std::move(cand));
    }
    std::sort(out.begin(), out.end(), [](const SurfaceMaximum& a, const SurfaceMaximum& b) {
        if (a.value != b.value) return a.value > b.value;
        for (int i = 0; i < a.sigma2_re.size(); ++i) {
            if (a.sigma2_re[i] != b.sigma2_re[i]) return a.sigma2_re[i] < b.sigma2_re[i];
        }
        return false;
    });
    return out;
}

}  // namespace

RLSurface scan_rl_surface(const DesignBundle& bundle, const Eigen::VectorXd& y,
                          const SurfaceGridSpec& grid_spec) {
    if (bundle.re_blocks.size() != 2) {
        throw std::invalid_argument("scan_rl_surface expects exactly two random blocks");
    }
    if (!(grid_spec.min_positive > 0.0) || !(grid_spec.max_positive > grid_spec.min_positive) ||
        grid_spec.points < 2) {
        throw std::invalid_argument("invalid surface grid spec");
    }

    REMLContext ctx(bundle, y);

    std::vector<double> axis;
    axis.push_back(0.0);
    const double lo = std::log10(grid_spec.min_positive);
    const double hi = std::log10(grid_spec.max_positive);
    for (int i = 0; i < grid_spec.points; ++i) {
        axis.push_back(std::pow(10.0, lo + (hi - lo) * i / (grid_spec.points - 1)));
    }

    RLSurface surf;
    surf.factor_row = bundle.re_blocks[0].factor;
    surf.factor_col = bundle.re_blocks[1].factor;
    surf.axis_row = axis;
    surf.axis_col = axis;
    const int nr = static_cast<int>(axis.size());
    surf.values.resize(nr, nr);

    OptimizerOptions opt;
    std::vector<SurfaceMaximum> found;
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nr; ++j) {
            Eigen::Vector2d s(axis[static_cast<std::size_t>(i)], axis[static_cast<std::size_t>(j)]);
            surf.values(i, j) = ctx.profile(s).value;
            Ascent asc = coordinate_ascent(ctx, s, opt);
            SurfaceMaximum sm;
            sm.sigma2_re = asc.s;
            sm.sigma2_e = asc.sigma2_e;
            sm.value = asc.value;
            sm.basin_size = 1;
            found.push_back(std::move(sm));
        }
    }
    surf.local_maxima = merge_maxima(std::move(found));
    return surf;
}

// ---- optimizer --------------------------------------------------------------

std::vector<VarianceComponents> default_starts(const std::vector<Factor>& re_factors) {
    if (re_factors.empty()) throw std::invalid_argument("default_starts: no random blocks");
    std::vector<VarianceComponents> starts;
    VarianceComponents ones;
    ones.sigma2_e = 1.0;
    for (Factor f : re_factors) ones.sigma2_re[f] = 1.0;
    starts.push_back(ones);

    if (re_factors.size() == 1) {
        VarianceComponents small = ones;
        small.sigma2_re[re_factors[0]] = 1e-4;
        starts.push_back(small);
        return starts;
    }
    for (Factor f : re_factors) {
        for (double s : {1e-4, 1.0}) {
            VarianceComponents vc;
            vc.sigma2_e = 1.0;
            for (Factor g : re_factors) vc.sigma2_re[g] = (g == f) ? s : 0.0;
            starts.push_back(vc);
        }
    }
    return starts;
}

REMLResult maximize_reml(const DesignBundle& bundle, const Eigen::VectorXd& y,
                         const std::vector<VarianceComponents>& starts,
                         const OptimizerOptions& opts) {
    if (starts.empty()) throw std::invalid_argument("maximize_reml: no starts");
    const std::vector<Factor> fs = bundle.re_factors();
    for (const auto& vc : starts) check_vc(vc, fs);

    REMLContext ctx(bundle, y);
    REMLResult result;

    if (ctx.contrast_norm2() <= 0.0) {
        // all-zero error contrasts carry no variance information; report the
        // boundary model so downstream ridge weights pin every block at zero
        VarianceComponents vc0;
        vc0.sigma2_e = 1.0;
        for (Factor f : fs) vc0.sigma2_re[f] = 0.0;
        double value = ctx.loglik(1.0, Eigen::VectorXd::Zero(ctx.n_re()));
        result.best = vc0;
        result.best_value = value;
        SurfaceMaximum sm;
        sm.sigma2_re = Eigen::VectorXd::Zero(ctx.n_re());
        sm.sigma2_e = 1.0;
        sm.value = value;
        sm.basin_size = static_cast<int>(starts.size());
        result.maxima.push_back(std::move(sm));
        for (const auto& start : starts) {
            result.starts.push_back(StartResult{start, vc0, value, 0, true});
        }
        return result;
    }

    std::vector<SurfaceMaximum> found;
    for (const auto& start : starts) {
        Eigen::VectorXd s0(ctx.n_re());
        for (int b = 0; b < ctx.n_re(); ++b) s0[b] = start.re(fs[static_cast<std::size_t>(b)]);
        Ascent asc = coordinate_ascent(ctx, s0, opts);

        VarianceComponents opt_vc;
        opt_vc.sigma2_e = asc.sigma2_e;
        for (int b = 0; b < ctx.n_re(); ++b) {
            opt_vc.sigma2_re[fs[static_cast<std::size_t>(b)]] = asc.s[b];
        }
        result.starts.push_back(StartResult{start, opt_vc, asc.value, asc.evals, asc.converged});

        SurfaceMaximum sm;
        sm.sigma2_re = asc.s;
        sm.sigma2_e = asc.sigma2_e;
        sm.value = asc.value;
        sm.basin_size = 1;
        found.push_back(std::move(sm));
    }

    result.maxima = merge_maxima(std::move(found));
    const SurfaceMaximum& top = result.maxima.front();
    result.best.sigma2_e = top.sigma2_e;
    for (int b = 0; b < ctx.n_re(); ++b) {
        result.best.sigma2_re[fs[static_cast<std::size_t>(b)]] = top.sigma2_re[b];
    }
    result.best_value = top.value;
    return result;
}

const char* start_policy_name(StartPolicy p) {
    switch (p) {
        case StartPolicy::default_ones: return "default_ones";
        case StartPolicy::multistart_global: return "multistart_global";
    }
    throw std::invalid_argument("unknown start policy");
}

StartPolicy start_policy_from_name(const std::string& name) {
    if (name == "default_ones") return StartPolicy::default_ones;
    if (name == "multistart_global") return StartPolicy::multistart_global;
    throw std::invalid_argument("unknown start policy: " + name);
}

FittedModel fit_re_apc(const DesignBundle& bundle, const Eigen::VectorXd& y, StartPolicy policy,
                       const OptimizerOptions& opts) {
    if (bundle.re_blocks.empty()) {
        throw std::invalid_argument("fit_re_apc requires at least one random block");
    }
    std::vector<VarianceComponents> starts = default_starts(bundle.re_factors());
    REMLResult res = maximize_reml(bundle, y, starts, opts);

    FittedModel fit;
    fit.convergence.starts = res.starts;
    fit.convergence.n_distinct_maxima = static_cast<int>(res.maxima.size());
    fit.convergence.multiple_maxima = res.maxima.size() > 1;

    if (policy == StartPolicy::default_ones) {
        fit.variance = res.starts[0].optimum;
        fit.rl_value = res.starts[0].value;
        fit.convergence.selected_start = 0;
    } else {
        fit.variance = res.best;
        fit.rl_value = res.best_value;
        for (std::size_t i = 0; i < res.starts.size(); ++i) {
            if (res.starts[i].value == res.best_value) {
                fit.convergence.selected_start = static_cast<int>(i);
                break;
            }
        }
    }
    if (res.starts[0].evals == 0) fit.convergence.note = "degenerate data: zero error contrasts";

    for (Factor f : bundle.re_factors()) {
        fit.penalty.lambda[f] = fit.variance.lambda_for(f);
    }
    fit.effects = solve_penalized(bundle, fit.penalty, y);
    return fit;
}

}  // namespace apcre
