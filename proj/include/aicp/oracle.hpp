#pragma once

// Closed-form cross-checks for linear models.
//
// For a linear model with design A the map from data to fitted values is the
// hat matrix
//   H = A (A^T Sigma^-1 A + alpha L^T L)^{-1} A^T Sigma^-1,
// and the expectation of the bootstrap estimator reduces analytically to
// trace(H): with f(theta_z) = H z and z = f(theta_y) + e,
//   E[(f(theta_z) - f(theta_y))^T Sigma^-1 (z - f(theta_y))]
//     = E[(H e)^T Sigma^-1 e] = trace(Sigma^-1 H Sigma) = trace(H),
// since the deterministic offset has zero-mean product with e. This makes
// trace(H) an oracle for the bootstrap that shares none of its code path.
//
// For the identity design the trace is computed through the eigenvalues of
// G = Sigma^{1/2} L^T L Sigma^{1/2}:
//   trace(H) = sum_k 1/(1 + alpha nu_k),
// with the two zero eigenvalues of G identified exactly (L^T L has rank
// N - 2 with an affine null space). The sum stays accurate for any alpha,
// including the stiff limit where trace -> 2.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "aicp/banded.hpp"
#include "aicp/bootstrap.hpp"
#include "aicp/dataset.hpp"
#include "aicp/dataset_io.hpp"
#include "aicp/penalty.hpp"
#include "aicp/solver.hpp"

namespace aicp {

// trace(H) for the identity design via the deflated symmetric eigenproblem.
inline double analytic_meff_nonparametric(const std::vector<double>& eps, double alpha) {
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    const auto n = static_cast<Eigen::Index>(eps.size());
    if (n < 3) throw std::invalid_argument("need at least 3 points");
    Matrix g = penalty_hessian(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) *= eps[static_cast<std::size_t>(i)] * eps[static_cast<std::size_t>(j)];
    const Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigendecomposition failed");
    Vector nu = es.eigenvalues(); // ascending
    nu[0] = 0.0;                  // structural rank deficiency of L^T L
    nu[1] = 0.0;
    double trace = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) trace += 1.0 / (1.0 + alpha * std::max(nu[k], 0.0));
    return trace;
}

// Cross-check route 1: dense inverse, trace(M^{-1} Sigma^{-1}).
inline double trace_hat_full_inverse(const std::vector<double>& eps, double alpha) {
    const auto n = static_cast<Eigen::Index>(eps.size());
    Matrix m = alpha * penalty_hessian(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = eps[static_cast<std::size_t>(i)];
        m(i, i) += 1.0 / (e * e);
    }
    const Matrix minv = m.ldlt().solve(Matrix::Identity(n, n));
    double trace = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = eps[static_cast<std::size_t>(i)];
        trace += minv(i, i) / (e * e);
    }
    return trace;
}

// Cross-check route 2: one banded solve per column of Sigma^{-1}.
inline double trace_hat_column_solves(const std::vector<double>& eps, double alpha) {
    const auto n = static_cast<Eigen::Index>(eps.size());
    const BandedSpd g = nonparametric_normal_matrix(eps, alpha).cholesky();
    double trace = 0.0;
    Vector col = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double e = eps[static_cast<std::size_t>(j)];
        col[j] = 1.0 / (e * e);
        trace += g.solve_factored(col)[j];
        col[j] = 0.0;
    }
    return trace;
}

// General design: trace(H) = trace(M^{-1} A^T Sigma^{-1} A).
inline double analytic_meff(const Matrix& a, const std::vector<double>& eps, double alpha) {
    if (is_identity(a)) return analytic_meff_nonparametric(eps, alpha);
    const Eigen::Index m = a.cols();
    Matrix wa = a;
    for (Eigen::Index i = 0; i < a.rows(); ++i) wa.row(i) /= eps[static_cast<std::size_t>(i)];
    const Matrix ata = wa.transpose() * wa;
    Matrix normal = ata;
    if (alpha > 0.0) {
        if (m < 3) throw std::invalid_argument("penalized design needs at least 3 columns");
        normal += alpha * penalty_hessian(m);
    }
    const auto ldlt = normal.ldlt();
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("singular normal matrix");
    return ldlt.solve(ata).trace();
}

struct OracleReport {
    double alpha = 0.0;
    double m_eff_analytic = 0.0;
    double m_eff_bootstrap = 0.0;
    double z_score = std::numeric_limits<double>::quiet_NaN();
    double chi2_prior_mean = 0.0;     // mean over kappa of sum_i b_i^2
    double chi2_posterior_mean = 0.0; // mean over kappa of the refit chi2
};

namespace detail {

inline double mean_over_used(const std::vector<double>& values,
                             const std::vector<double>& marker) {
    double sum = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (std::isnan(marker[k])) continue;
        sum += values[k];
        ++n;
    }
    return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

inline OracleReport report_from_summary(double alpha, double analytic,
                                        const BootstrapSummary& s) {
    OracleReport r;
    r.alpha = alpha;
    r.m_eff_analytic = analytic;
    r.m_eff_bootstrap = s.m_eff;
    if (s.var_direct && *s.var_direct > 0.0)
        r.z_score = (s.m_eff - analytic) / std::sqrt(*s.var_direct);
    r.chi2_prior_mean = mean_over_used(s.chi2_prior_per_iter, s.m_eff_per_iter);
    r.chi2_posterior_mean = mean_over_used(s.chi2_boot_per_iter, s.m_eff_per_iter);
    return r;
}

} // namespace detail

// Bootstrap-vs-oracle comparison for the non-parametric family over an
// alpha grid (alpha = 0 entries exercise the interpolation identities).
inline std::vector<OracleReport> validate_bootstrap(const DataSet& data,
                                                    const BootstrapPlan& plan,
                                                    const std::vector<double>& alpha_grid,
                                                    int jobs = 1) {
    validate(data);
    validate(plan);
    std::vector<OracleReport> reports;
    reports.reserve(alpha_grid.size());
    for (const double alpha : alpha_grid) {
        const ModelSpec spec = ModelSpec::nonparametric(alpha);
        const FitResult fit_y = fit(spec, data);
        const BootstrapSummary s = run_bootstrap(spec, data, fit_y, plan, jobs);
        reports.push_back(detail::report_from_summary(
            alpha, analytic_meff_nonparametric(data.eps, alpha), s));
    }
    return reports;
}

// Unpenalized general linear design (m independent columns); the analytic
// value is trace(H) = m.
inline OracleReport validate_linear_design(const Matrix& a, const DataSet& data,
                                           const BootstrapPlan& plan, int jobs = 1) {
    validate(data);
    validate(plan);
    const LinearFit lf = solve_linear_penalized(a, data, 0.0);
    FitResult fit_y;
    fit_y.theta_hat = lf.theta;
    fit_y.fitted = lf.fitted;
    fit_y.chi2 = lf.chi2;
    fit_y.objective = lf.chi2;
    fit_y.converged = true;
    const BootstrapSummary s = run_bootstrap_engine(
        data, fit_y, plan,
        [&](const DataSet& z, int) {
            const LinearFit rf = solve_linear_penalized(a, z, 0.0);
            FitResult r;
            r.theta_hat = rf.theta;
            r.fitted = rf.fitted;
            r.chi2 = rf.chi2;
            r.objective = rf.chi2;
            r.converged = true;
            return r;
        },
        jobs);
    return detail::report_from_summary(0.0, analytic_meff(a, data.eps, 0.0), s);
}

// Scaled-power polynomial design with m columns on [-1, 1].
inline Matrix polynomial_design(const std::vector<double>& x, int m) {
    if (m < 1) throw std::invalid_argument("need at least one column");
    const auto n = static_cast<Eigen::Index>(x.size());
    const double lo = x.front(), hi = x.back();
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    Matrix a(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = (x[static_cast<std::size_t>(i)] - mid) / half;
        double p = 1.0;
        for (int k = 0; k < m; ++k) {
            a(i, k) = p;
            p *= t;
        }
    }
    return a;
}

inline void write_oracle_csv(const std::vector<OracleReport>& reports, std::ostream& out) {
    out << "alpha,meff_analytic,meff_bootstrap,z_score,chi2_prior,chi2_posterior\n";
    for (const auto& r : reports) {
        out << format_double(r.alpha) << ',' << format_double(r.m_eff_analytic) << ','
            << format_double(r.m_eff_bootstrap) << ',' << format_double(r.z_score) << ','
            << format_double(r.chi2_prior_mean) << ',' << format_double(r.chi2_posterior_mean)
            << '\n';
    }
}

} // namespace aicp
