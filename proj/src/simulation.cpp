#include "apcre/simulation.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "apcre/io_util.hpp"
#include "apcre/orthopoly.hpp"
#include "apcre/rng.hpp"

namespace apcre {

SimSpec SimSpec::defaults() {
    SimSpec spec;
    for (int i = 0; i <= 20; ++i) spec.m_grid.push_back(i * 0.05);
    return spec;
}

void SimSpec::validate() const {
    if (a < 2 || p < 2) throw std::invalid_argument("grid needs a >= 2 and p >= 2");
    if (a + p - 1 < 3) throw std::invalid_argument("need at least three cohorts for a quadratic");
    if (m_grid.empty()) throw std::invalid_argument("m_grid is empty");
    for (double m : m_grid) {
        if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("m values must lie in [0, 1]");
    }
    if (replicates < 1) throw std::invalid_argument("need at least one replicate");
    if (!(noise_sd > 0.0)) throw std::invalid_argument("noise_sd must be positive");
    if (!(shrink_threshold > 0.0)) throw std::invalid_argument("shrink_threshold must be positive");
}

Eigen::VectorXd generate_dataset(double m, int replicate, const SimSpec& spec) {
    spec.validate();
    if (replicate < 0) throw std::invalid_argument("replicate index must be >= 0");
    if (!(m >= 0.0 && m <= 1.0)) throw std::invalid_argument("m must lie in [0, 1]");

    Grid grid = build_grid(spec.a, spec.p);
    OrthoBasis basis = orthonormal_poly_basis(grid.c);

    CounterRng rng(spec.seed, std::bit_cast<std::uint64_t>(m),
                   static_cast<std::uint64_t>(replicate));
    Eigen::VectorXd y(grid.n());
    for (int r = 0; r < grid.n(); ++r) {
        int k = grid.cells[static_cast<std::size_t>(r)].k;
        y[r] = basis.B(k - 1, 1) + m * basis.B(k - 1, 2) + spec.noise_sd * rng.next_normal();
    }
    return y;
}

ShrinkFlags classify_shrinkage(const FittedModel& fit, const SimSpec& spec) {
    ShrinkFlags flags;
    flags.period =
        std::abs(fit.effects.block("period").decomposition.linear_slope) < spec.shrink_threshold;
    flags.cohort =
        std::abs(fit.effects.block("cohort").decomposition.linear_slope) < spec.shrink_threshold;
    return flags;
}

std::vector<SimSummaryRow> run_shrinkage_study(const SimSpec& spec, StartPolicy policy) {
    spec.validate();
    Grid grid = build_grid(spec.a, spec.p);
    DesignBundle bundle = build_model(grid, {Factor::period, Factor::cohort});

    std::vector<SimSummaryRow> rows;
    rows.reserve(spec.m_grid.size());
    for (double m : spec.m_grid) {
        SimSummaryRow row;
        row.m = m;
        row.replicates = spec.replicates;
        double sum_age = 0.0;
        double sum_period = 0.0;
        double sum_cohort = 0.0;
        for (int rep = 0; rep < spec.replicates; ++rep) {
            Eigen::VectorXd y = generate_dataset(m, rep, spec);
            FittedModel fit;
            try {
                fit = fit_re_apc(bundle, y, policy);
            } catch (const std::exception&) {
                ++row.fit_failures;
                continue;
            }
            ShrinkFlags flags = classify_shrinkage(fit, spec);
            if (flags.period) ++row.period_shrunk;
            if (flags.cohort) ++row.cohort_shrunk;
            if (fit.convergence.multiple_maxima) ++row.multiple_maxima;
            sum_age += fit.effects.block("age").decomposition.linear_slope;
            sum_period += fit.effects.block("period").decomposition.linear_slope;
            sum_cohort += fit.effects.block("cohort").decomposition.linear_slope;
        }
        int ok = spec.replicates - row.fit_failures;
        if (ok > 0) {
            row.mean_age_slope = sum_age / ok;
            row.mean_period_slope = sum_period / ok;
            row.mean_cohort_slope = sum_cohort / ok;
        }
        rows.push_back(row);
    }
    return rows;
}

std::string shrinkage_tsv(const std::vector<SimSummaryRow>& rows) {
    std::string out =
        "m\treplicates\tperiod_shrunk\tcohort_shrunk\tmean_age_slope\tmean_period_slope\t"
        "mean_cohort_slope\tmultiple_maxima\tfit_failures\n";
    for (const SimSummaryRow& r : rows) {
        out += fmt_short(r.m);
        out += '\t';
        out += std::to_string(r.replicates);
        out += '\t';
        out += std::to_string(r.period_shrunk);
        out += '\t';
        out += std::to_string(r.cohort_shrunk);
        out += '\t';
        out += fmt_short(r.mean_age_slope);
        out += '\t';
        out += fmt_short(r.mean_period_slope);
        out += '\t';
        out += fmt_short(r.mean_cohort_slope);
        out += '\t';
        out += std::to_string(r.multiple_maxima);
        out += '\t';
        out += std::to_string(r.fit_failures);
        out += '\n';
    }
    return out;
}

}  // namespace apcre
