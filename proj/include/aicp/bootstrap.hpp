#pragma once

// Bootstrap estimate of the effective number of free parameters.
//
// Around an initial fit f(theta_y), iteration kappa draws a synthetic sample
//   z_i = f_i(theta_y) + N(0, eps_i)
// from a noise stream indexed by (master_seed, kappa) alone, refits the same
// model, and accumulates
//   m_eff^kappa = sum_i a_i b_i,
//   a_i = (f_i(theta_z) - f_i(theta_y))/eps_i,  b_i = (z_i - f_i(theta_y))/eps_i.
// The average over kappa estimates m_eff; the scatter of m_eff^kappa is
// reconstructed per point from the moments of a, b, and c = a*b, including
// the full cross-covariance sum over point pairs.
//
// Streams depend only on (master_seed, kappa), never on the model being
// fitted, so scans over alpha or order reuse identical noise patterns
// (common random numbers) and differences between neighbouring models have
// strongly reduced variance.
//
// All moments over kappa use the population normalization 1/N. That choice
// makes the product-moment decomposition of Var(c_i) an exact identity on
// the samples, not just in expectation.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "aicp/dataset.hpp"
#include "aicp/dataset_io.hpp"
#include "aicp/model.hpp"
#include "aicp/parallel.hpp"
#include "aicp/rng.hpp"
#include "aicp/solver.hpp"

namespace aicp {

struct BootstrapPlan {
    int n_boot = 500;
    std::uint64_t master_seed = 0;

    bool operator==(const BootstrapPlan&) const = default;
};

inline void validate(const BootstrapPlan& plan) {
    if (plan.n_boot < 1) throw std::invalid_argument("n_boot must be >= 1");
}

// Synthetic sample for iteration kappa (1-based). x and eps are copied from
// the data; only y is replaced by fit + noise.
inline DataSet make_bootstrap(const FitResult& fit, const DataSet& data,
                              const BootstrapPlan& plan, int kappa) {
    GaussianStream noise =
        gaussian_stream(plan.master_seed, StreamDomain::Bootstrap, static_cast<std::uint64_t>(kappa));
    DataSet z;
    z.x = data.x;
    z.eps = data.eps;
    z.y.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        z.y[i] = fit.fitted[static_cast<Eigen::Index>(i)] + data.eps[i] * noise.next();
    return z;
}

struct MeffSample {
    double m_eff;
    Vector a;
    Vector b;
};

inline MeffSample meff_single(const FitResult& fit_y, const FitResult& fit_z, const DataSet& z,
                              const DataSet& data) {
    const auto n = static_cast<Eigen::Index>(data.size());
    if (fit_y.fitted.size() != n || fit_z.fitted.size() != n ||
        z.size() != data.size())
        throw std::invalid_argument("dimension mismatch between fits and data");
    MeffSample s;
    s.a.resize(n);
    s.b.resize(n);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double eps = data.eps[static_cast<std::size_t>(i)];
        s.a[i] = (fit_z.fitted[i] - fit_y.fitted[i]) / eps;
        s.b[i] = (z.y[static_cast<std::size_t>(i)] - fit_y.fitted[i]) / eps;
        sum += s.a[i] * s.b[i];
    }
    s.m_eff = sum;
    return s;
}

// Per-point moments over kappa (population normalization). var_c_eq22 is the
// exact product-moment decomposition of Var(c_i) and reproduces var_c on the
// samples; var_c_printed substitutes E(b) = 0, Var(b) = 1 and carries the
// Var(a^2) last term as printed in the source formula. The two differ by
// Var(a) + E(a)^2 - Var(a^2) in general; both are reported, neither is
// silently corrected.
struct PerPointMoments {
    Vector mean_a, var_a, mean_b, var_b;
    Vector cov_ab, cov_a2b2, var_a2, mean_a2;
    Vector var_c;
    Vector var_c_eq22;
    Vector var_c_printed;
};

struct BootstrapSummary {
    std::vector<double> m_eff_per_iter;    // NaN marks an excluded (failed) refit
    std::vector<double> chi2_boot_per_iter; // chi2 of each bootstrap refit vs its own z
    std::vector<double> chi2_prior_per_iter; // sum_i b_i^2, residuals of z vs the initial fit
    Matrix contributions;                   // row kappa-1: c_i = a_i b_i (NaN if failed)
    double m_eff = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> var_direct;   // Var(m_eff) = pop. variance of m_eff^kappa / N
    std::optional<double> var_bienayme; // same quantity via the per-point reconstruction
    PerPointMoments per_point;          // filled when at least 2 iterations succeeded
    int n_failed = 0;
    int n_used = 0;
    bool valid = false;
    BootstrapPlan plan;
    std::size_t n_data = 0;
};

struct ScatterEstimate {
    double var_meff_kappa; // Var(m_eff^kappa) = sum_i Var(c_i) + sum_{i != j} Cov(c_i, c_j)
    double var_meff;       // Var(m_eff) = Var(m_eff^kappa) / N_boot
    double sum_var_per_point;
    double sum_cov_cross;
};

// Bienayme reconstruction from the stored per-iteration contributions. The
// cross-covariance sum is evaluated exactly over all point pairs.
inline ScatterEstimate scatter_bienayme(const BootstrapSummary& summary) {
    if (summary.n_used < 2)
        throw std::invalid_argument("scatter estimate needs at least 2 bootstrap iterations");
    const auto n_pts = static_cast<Eigen::Index>(summary.n_data);

    // centered contribution matrix over successful iterations
    Matrix d(summary.n_used, n_pts);
    Eigen::Index row = 0;
    for (Eigen::Index k = 0; k < summary.contributions.rows(); ++k) {
        if (std::isnan(summary.m_eff_per_iter[static_cast<std::size_t>(k)])) continue;
        d.row(row++) = summary.contributions.row(k);
    }
    const Eigen::RowVectorXd mean = d.colwise().mean();
    d.rowwise() -= mean;

    const Matrix cov = (d.transpose() * d) / static_cast<double>(summary.n_used);
    ScatterEstimate est{};
    est.sum_var_per_point = cov.trace();
    est.sum_cov_cross = cov.sum() - cov.trace();
    est.var_meff_kappa = est.sum_var_per_point + est.sum_cov_cross;
    est.var_meff = est.var_meff_kappa / static_cast<double>(summary.n_used);
    return est;
}

namespace detail {

inline double population_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size());
}

inline void summarize(BootstrapSummary& s, const Matrix& a, const Matrix& b) {
    // success is marked by a finite m_eff entry; failed refits stay NaN
    const Eigen::Index n_pts = a.cols();
    const std::size_t n_boot = s.m_eff_per_iter.size();
    const auto used = [&](std::size_t k) { return !std::isnan(s.m_eff_per_iter[k]); };
    s.n_used = 0;
    double sum_m = 0.0;
    for (std::size_t k = 0; k < n_boot; ++k) {
        if (!used(k)) continue;
        ++s.n_used;
        sum_m += s.m_eff_per_iter[k];
    }
    s.n_failed = static_cast<int>(n_boot) - s.n_used;
    s.valid = s.n_used > 0 && s.n_failed * 10 <= static_cast<int>(n_boot);
    if (s.n_used == 0) return;
    s.m_eff = sum_m / s.n_used;

    if (s.n_used < 2) return;

    std::vector<double> used_m;
    used_m.reserve(static_cast<std::size_t>(s.n_used));
    for (std::size_t k = 0; k < n_boot; ++k)
        if (used(k)) used_m.push_back(s.m_eff_per_iter[k]);
    s.var_direct = population_variance(used_m) / static_cast<double>(s.n_used);

    // per-point moments over the successful iterations
    Matrix au(s.n_used, n_pts), bu(s.n_used, n_pts);
    Eigen::Index row = 0;
    for (std::size_t k = 0; k < n_boot; ++k) {
        if (!used(k)) continue;
        au.row(row) = a.row(static_cast<Eigen::Index>(k));
        bu.row(row) = b.row(static_cast<Eigen::Index>(k));
        ++row;
    }
    const double inv_n = 1.0 / static_cast<double>(s.n_used);
    PerPointMoments& pp = s.per_point;
    const auto moments = [&](const Matrix& m) {
        Vector mean = m.colwise().mean();
        Vector var(n_pts);
        for (Eigen::Index j = 0; j < n_pts; ++j)
            var[j] = (m.col(j).array() - mean[j]).square().sum() * inv_n;
        return std::pair{mean, var};
    };
    std::tie(pp.mean_a, pp.var_a) = moments(au);
    std::tie(pp.mean_b, pp.var_b) = moments(bu);
    pp.mean_a2 = pp.var_a + pp.mean_a.cwiseProduct(pp.mean_a);

    pp.cov_ab.resize(n_pts);
    pp.cov_a2b2.resize(n_pts);
    pp.var_a2.resize(n_pts);
    pp.var_c.resize(n_pts);
    pp.var_c_eq22.resize(n_pts);
    pp.var_c_printed.resize(n_pts);
    for (Eigen::Index j = 0; j < n_pts; ++j) {
        const auto aj = au.col(j).array();
        const auto bj = bu.col(j).array();
        const double ma = pp.mean_a[j], mb = pp.mean_b[j];
        pp.cov_ab[j] = ((aj - ma) * (bj - mb)).sum() * inv_n;
        const auto a2 = aj.square();
        const auto b2 = bj.square();
        const double ma2 = a2.sum() * inv_n;
        const double mb2 = b2.sum() * inv_n;
        pp.cov_a2b2[j] = ((a2 - ma2) * (b2 - mb2)).sum() * inv_n;
        pp.var_a2[j] = (a2 - ma2).square().sum() * inv_n;
        const auto cj = aj * bj;
        const double mc = cj.sum() * inv_n;
        pp.var_c[j] = (cj - mc).square().sum() * inv_n;
        const double e_ab = pp.cov_ab[j] + ma * mb;
        pp.var_c_eq22[j] = pp.cov_a2b2[j] - e_ab * e_ab +
                           (pp.var_a[j] + ma * ma) * (pp.var_b[j] + mb * mb);
        pp.var_c_printed[j] =
            pp.cov_a2b2[j] - pp.cov_ab[j] * pp.cov_ab[j] + pp.var_a2[j];
    }

    s.var_bienayme = scatter_bienayme(s).var_meff;
}

} // namespace detail

// Core engine: refit(z, kappa) must return the refit of the model under
// study to the synthetic sample z. Iterations run independently (optionally
// in parallel) and are reduced in kappa order.
template <class Refit>
BootstrapSummary run_bootstrap_engine(const DataSet& data, const FitResult& fit_y,
                                      const BootstrapPlan& plan, Refit&& refit, int jobs = 1) {
    validate(plan);
    const auto n_pts = static_cast<Eigen::Index>(data.size());
    const auto n_boot = static_cast<std::size_t>(plan.n_boot);

    BootstrapSummary s;
    s.plan = plan;
    s.n_data = data.size();
    s.m_eff_per_iter.assign(n_boot, std::numeric_limits<double>::quiet_NaN());
    s.chi2_boot_per_iter.assign(n_boot, std::numeric_limits<double>::quiet_NaN());
    s.chi2_prior_per_iter.assign(n_boot, std::numeric_limits<double>::quiet_NaN());
    s.contributions =
        Matrix::Constant(static_cast<Eigen::Index>(n_boot), n_pts,
                         std::numeric_limits<double>::quiet_NaN());
    Matrix a_rows = s.contributions, b_rows = s.contributions;

    // each iteration owns its own row and array slot, so concurrent
    // execution reduces to the sequential result bit for bit
    parallel_for(n_boot, jobs, [&](std::size_t idx) {
        const int kappa = static_cast<int>(idx) + 1;
        const DataSet z = make_bootstrap(fit_y, data, plan, kappa);
        const FitResult fit_z = refit(z, kappa);
        if (!fit_z.converged) return;
        const MeffSample sample = meff_single(fit_y, fit_z, z, data);
        const auto k = static_cast<Eigen::Index>(idx);
        a_rows.row(k) = sample.a;
        b_rows.row(k) = sample.b;
        s.contributions.row(k) = sample.a.cwiseProduct(sample.b);
        s.chi2_boot_per_iter[idx] = fit_z.chi2;
        s.chi2_prior_per_iter[idx] = sample.b.squaredNorm();
        s.m_eff_per_iter[idx] = sample.m_eff; // written last: marks success
    });

    detail::summarize(s, a_rows, b_rows);
    return s;
}

// Bootstrap for a model family: non-parametric refits use the exact linear
// path, parametric refits run LM warm-started at theta_y.
inline BootstrapSummary run_bootstrap(const ModelSpec& spec, const DataSet& data,
                                      const FitResult& fit_y, const BootstrapPlan& plan,
                                      int jobs = 1) {
    if (spec.kind == ModelKind::NonParametric) {
        return run_bootstrap_engine(
            data, fit_y, plan,
            [&](const DataSet& z, int) { return solve_nonparametric(z, spec.alpha); }, jobs);
    }
    return run_bootstrap_engine(
        data, fit_y, plan,
        [&](const DataSet& z, int) { return fit_lm(spec, z, fit_y.theta_hat); }, jobs);
}

// Scatter of differences between two models evaluated with common random
// numbers:
//   Var(dm^kappa) = Var(m1^kappa) + Var(m2^kappa) - 2 Cov(m1^kappa, m2^kappa)
// and the analogous decomposition for the bootstrap chi2 values.
struct DifferenceScatter {
    double dm_eff = 0.0;
    std::optional<double> var_dm_kappa, var_dm;
    double var_m1_kappa = 0.0, var_m2_kappa = 0.0, cov_m_kappa = 0.0;
    double dchi2 = 0.0;
    std::optional<double> var_dchi2_kappa, var_dchi2;
    double cov_chi2_kappa = 0.0;
    int n_pairs = 0;
};

inline DifferenceScatter derivative_scatter(const BootstrapSummary& at,
                                            const BootstrapSummary& at_plus) {
    if (!(at.plan == at_plus.plan) || at.n_data != at_plus.n_data)
        throw std::invalid_argument(
            "bootstrap plans differ; the covariance term requires common random numbers");

    std::vector<double> m1, m2, c1, c2;
    for (std::size_t k = 0; k < at.m_eff_per_iter.size(); ++k) {
        if (std::isnan(at.m_eff_per_iter[k]) || std::isnan(at_plus.m_eff_per_iter[k])) continue;
        m1.push_back(at.m_eff_per_iter[k]);
        m2.push_back(at_plus.m_eff_per_iter[k]);
        c1.push_back(at.chi2_boot_per_iter[k]);
        c2.push_back(at_plus.chi2_boot_per_iter[k]);
    }
    DifferenceScatter d;
    d.n_pairs = static_cast<int>(m1.size());
    if (d.n_pairs == 0) throw std::runtime_error("no joint successful bootstrap iterations");

    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double mm1 = mean(m1), mm2 = mean(m2), mc1 = mean(c1), mc2 = mean(c2);
    d.dm_eff = mm2 - mm1;
    d.dchi2 = mc2 - mc1;

    if (d.n_pairs >= 2) {
        double v1 = 0.0, v2 = 0.0, cv = 0.0, w1 = 0.0, w2 = 0.0, cw = 0.0;
        for (int k = 0; k < d.n_pairs; ++k) {
            const double e1 = m1[static_cast<std::size_t>(k)] - mm1;
            const double e2 = m2[static_cast<std::size_t>(k)] - mm2;
            v1 += e1 * e1;
            v2 += e2 * e2;
            cv += e1 * e2;
            const double f1 = c1[static_cast<std::size_t>(k)] - mc1;
            const double f2 = c2[static_cast<std::size_t>(k)] - mc2;
            w1 += f1 * f1;
            w2 += f2 * f2;
            cw += f1 * f2;
        }
        const double inv_n = 1.0 / static_cast<double>(d.n_pairs);
        d.var_m1_kappa = v1 * inv_n;
        d.var_m2_kappa = v2 * inv_n;
        d.cov_m_kappa = cv * inv_n;
        d.var_dm_kappa = d.var_m1_kappa + d.var_m2_kappa - 2.0 * d.cov_m_kappa;
        d.var_dm = *d.var_dm_kappa * inv_n;
        d.cov_chi2_kappa = cw * inv_n;
        d.var_dchi2_kappa = w1 * inv_n + w2 * inv_n - 2.0 * d.cov_chi2_kappa;
        d.var_dchi2 = *d.var_dchi2_kappa * inv_n;
    }
    return d;
}

// Audit dump, one row per iteration.
inline void write_bootstrap_csv(const BootstrapSummary& s, std::ostream& out) {
    out << "kappa,m_eff_kappa,chi2_boot\n";
    for (std::size_t k = 0; k < s.m_eff_per_iter.size(); ++k) {
        out << (k + 1) << ',' << format_double(s.m_eff_per_iter[k]) << ','
            << format_double(s.chi2_boot_per_iter[k]) << '\n';
    }
}

} // namespace aicp
