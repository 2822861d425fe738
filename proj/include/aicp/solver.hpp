#pragma once

// Minimization of chi2(theta) + alpha * P(f(theta)).
//
// Two routes:
//  * fit_lm      damped least squares (Levenberg-Marquardt) on the extended
//                residual [ (y - f)/eps ; sqrt(alpha) L f ]; works for both
//                families. sigma stays positive by iterating in log(sigma).
//  * banded path exact solve of the convex non-parametric problem,
//                (Sigma^-1 + alpha L^T L) theta = Sigma^-1 y,
//                with iterative refinement on the factored residual.
//
// fit() dispatches: NonParametric -> banded path, GaussHermite -> LM.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "aicp/banded.hpp"
#include "aicp/dataset.hpp"
#include "aicp/model.hpp"
#include "aicp/penalty.hpp"

namespace aicp {

struct FitResult {
    Vector theta_hat;
    Vector fitted;
    double chi2 = 0.0;
    double penalty_value = 0.0;
    double objective = 0.0;   // chi2 + alpha * penalty_value
    double gradient_norm = 0.0; // max-norm of grad(chi2 + alpha P) at exit
    bool converged = false;
    int n_iterations = 0;
};

struct LmOptions {
    double gradient_tol = 1e-6;   // converged iff |grad|_inf <= tol * (1 + |objective|)
    double objective_tol = 1e-12; // stop when the relative decrease falls below this
    int max_iterations = 500;
    double lambda_scale = 1e-3; // initial damping vs max diagonal of A^T Sigma^-1 A
    double lambda_max = 1e30;
    std::vector<double>* accepted_objectives = nullptr; // optional monotonicity trace
};

inline double chi_squared(const Vector& fitted, const DataSet& data) {
    double sum = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = (data.y[i] - fitted[static_cast<Eigen::Index>(i)]) / data.eps[i];
        sum += r * r;
    }
    return sum;
}

namespace detail {

struct LmState {
    Vector residual; // stacked data + penalty residual
    double chi2 = 0.0, penalty = 0.0, objective = 0.0;
};

inline LmState lm_state(const Vector& f, const DataSet& data, double alpha) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index npen = alpha > 0.0 ? n - 2 : 0;
    LmState s;
    s.residual.resize(n + npen);
    for (Eigen::Index i = 0; i < n; ++i)
        s.residual[i] = (data.y[static_cast<std::size_t>(i)] - f[i]) /
                        data.eps[static_cast<std::size_t>(i)];
    s.chi2 = s.residual.head(n).squaredNorm();
    if (alpha > 0.0) {
        const Vector lf = apply_second_difference(f);
        s.residual.tail(npen) = std::sqrt(alpha) * lf;
        s.penalty = lf.squaredNorm();
    } else {
        s.penalty = f.size() >= 3 ? penalty(f) : 0.0;
    }
    s.objective = s.chi2 + alpha * s.penalty;
    return s;
}

// Jacobian of the stacked residual w.r.t. the given parameter coordinates.
inline Matrix lm_residual_jacobian(const Matrix& a, const DataSet& data, double alpha) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const Eigen::Index npen = alpha > 0.0 ? n - 2 : 0;
    Matrix jr(n + npen, a.cols());
    for (Eigen::Index i = 0; i < n; ++i)
        jr.row(i) = -a.row(i) / data.eps[static_cast<std::size_t>(i)];
    if (alpha > 0.0) {
        const double s = std::sqrt(alpha);
        for (Eigen::Index k = 0; k + 2 < n; ++k)
            jr.row(n + k) = s * (a.row(k) - 2.0 * a.row(k + 1) + a.row(k + 2));
    }
    return jr;
}

} // namespace detail

// Levenberg-Marquardt minimization from an explicit start. Non-convergence
// is reported through the result, not thrown; a non-finite objective at the
// start is an error.
inline FitResult fit_lm(const ModelSpec& spec, const DataSet& data, const Vector& init,
                        const LmOptions& opts = {}) {
    validate(data);
    check_theta(spec, init, data.size());
    const bool gh = spec.kind == ModelKind::GaussHermite;
    const double alpha = gh ? 0.0 : spec.alpha;
    if (!gh && alpha > 0.0 && !is_uniform_grid(data))
        throw std::invalid_argument("penalized non-parametric fits require a uniform grid");

    // internal coordinates: log(sigma) for the parametric family
    Vector p = init;
    if (gh) p[2] = std::log(init[2]);
    const auto to_external = [&](const Vector& q) {
        Vector t = q;
        if (gh) t[2] = std::exp(q[2]);
        return t;
    };

    Vector theta = to_external(p);
    Vector f = model_values(spec, theta, data.x);
    detail::LmState state = detail::lm_state(f, data, alpha);
    if (!std::isfinite(state.objective))
        throw std::runtime_error("non-finite objective at the initial point");

    Matrix a_ext = model_jacobian(spec, theta, data.x);
    Matrix a_int = a_ext;
    if (gh) a_int.col(2) *= theta[2]; // d theta_sigma / d log sigma = sigma

    Matrix jr = detail::lm_residual_jacobian(a_int, data, alpha);
    Matrix jtj = jr.transpose() * jr;
    Vector g_int = jr.transpose() * state.residual;

    const auto grad_ext_norm = [&](const Vector& g, double sigma) {
        Vector ge = 2.0 * g;
        if (gh) ge[2] /= sigma; // chain rule back to sigma
        return ge.template lpNorm<Eigen::Infinity>();
    };

    // damping initialized relative to the stiffest direction of the data
    // block; updated by the gain ratio between actual and predicted decrease
    double lambda = opts.lambda_scale * std::max(jtj.diagonal().maxCoeff(), 1e-300);
    double nu = 2.0;

    FitResult result;
    result.converged = false;
    double gnorm = grad_ext_norm(g_int, gh ? theta[2] : 1.0);
    int iter = 0;
    int plateau = 0; // consecutive accepted steps below the objective-change tolerance
    for (; iter < opts.max_iterations; ++iter) {
        gnorm = grad_ext_norm(g_int, gh ? theta[2] : 1.0);
        if (gnorm <= opts.gradient_tol * (1.0 + std::abs(state.objective))) {
            result.converged = true;
            break;
        }

        Matrix damped = jtj;
        damped.diagonal().array() += lambda;
        const Vector delta = damped.ldlt().solve(-g_int);
        if (!delta.allFinite()) {
            lambda *= nu;
            nu *= 2.0;
            if (lambda > opts.lambda_max) break;
            continue;
        }

        const Vector p_trial = p + delta;
        const Vector theta_trial = to_external(p_trial);
        Vector f_trial;
        double obj_trial = std::numeric_limits<double>::quiet_NaN();
        detail::LmState state_trial;
        if (theta_trial.allFinite() && (!gh || theta_trial[2] > 0.0)) {
            f_trial = model_values(spec, theta_trial, data.x);
            state_trial = detail::lm_state(f_trial, data, alpha);
            obj_trial = state_trial.objective;
        }

        // Near the optimum the true decrease drops below the resolution of
        // the objective; a tie within the rounding floor still moves the
        // iterate toward the minimizer of the local model, so take it.
        const double predicted = delta.dot(lambda * delta - g_int);
        const double noise_floor =
            8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(state.objective));
        const bool tie_step = std::isfinite(obj_trial) && predicted > 0.0 &&
                              obj_trial >= state.objective &&
                              obj_trial <= state.objective + noise_floor;

        if ((std::isfinite(obj_trial) && obj_trial < state.objective) || tie_step) {
            const double decrease = state.objective - obj_trial;
            // gain ratio vs the local quadratic model of the damped step
            const double rho = predicted > 0.0 ? std::max(decrease, 0.0) / predicted : 1.0;
            p = p_trial;
            theta = theta_trial;
            f = f_trial;
            state = state_trial;
            if (opts.accepted_objectives) opts.accepted_objectives->push_back(state.objective);
            const double shrink = 1.0 - std::pow(2.0 * rho - 1.0, 3);
            lambda = std::max(lambda * std::max(1.0 / 3.0, shrink), 1e-300);
            nu = 2.0;

            a_ext = model_jacobian(spec, theta, data.x);
            a_int = a_ext;
            if (gh) a_int.col(2) *= theta[2];
            jr = detail::lm_residual_jacobian(a_int, data, alpha);
            jtj = jr.transpose() * jr;
            g_int = jr.transpose() * state.residual;

            // the decrease shrinks quadratically near the optimum while the
            // gradient is still falling; only a sustained plateau stops the loop
            if (decrease < opts.objective_tol * (1.0 + std::abs(state.objective)))
                ++plateau;
            else
                plateau = 0;
            if (plateau >= 8) {
                gnorm = grad_ext_norm(g_int, gh ? theta[2] : 1.0);
                result.converged =
                    gnorm <= opts.gradient_tol * (1.0 + std::abs(state.objective));
                ++iter;
                break;
            }
        } else {
            lambda *= nu;
            nu *= 2.0;
            if (lambda > opts.lambda_max) break;
        }
    }

    result.theta_hat = theta;
    result.fitted = f;
    result.chi2 = state.chi2;
    result.penalty_value = state.penalty;
    result.objective = state.objective;
    result.gradient_norm = gnorm;
    result.n_iterations = iter;
    return result;
}

// Exact global minimizer of the convex non-parametric objective. alpha = 0
// is the interpolation limit theta = y with chi2 identically zero.
inline FitResult solve_nonparametric(const DataSet& data, double alpha) {
    validate(data);
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (alpha > 0.0 && !is_uniform_grid(data))
        throw std::invalid_argument("penalized non-parametric fits require a uniform grid");

    const auto n = static_cast<Eigen::Index>(data.size());
    FitResult result;
    if (alpha == 0.0) {
        result.theta_hat.resize(n);
        for (Eigen::Index i = 0; i < n; ++i)
            result.theta_hat[i] = data.y[static_cast<std::size_t>(i)];
        result.fitted = result.theta_hat;
        result.chi2 = 0.0;
        result.penalty_value = penalty(result.fitted);
        result.objective = 0.0;
        result.gradient_norm = 0.0;
        result.converged = true;
        result.n_iterations = 0;
        return result;
    }

    Vector rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = data.eps[static_cast<std::size_t>(i)];
        rhs[i] = data.y[static_cast<std::size_t>(i)] / (e * e);
    }

    const BandedSpd m = nonparametric_normal_matrix(data.eps, alpha);
    const BandedSpd g = m.cholesky();
    Vector theta = g.solve_factored(rhs);

    // residual of the normal equations in factored form, r = rhs - M theta;
    // grad(chi2 + alpha P) = -2 r, so refinement drives the exit gradient down
    const auto normal_residual = [&](const Vector& t) {
        Vector r = rhs;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double e = data.eps[static_cast<std::size_t>(i)];
            r[i] -= t[i] / (e * e);
        }
        r -= alpha * apply_penalty_hessian(t);
        return r;
    };

    Vector r = normal_residual(theta);
    int refinements = 0;
    for (; refinements < 3; ++refinements) {
        const Vector correction = g.solve_factored(r);
        const Vector theta_new = theta + correction;
        const Vector r_new = normal_residual(theta_new);
        if (r_new.template lpNorm<Eigen::Infinity>() >= r.template lpNorm<Eigen::Infinity>())
            break;
        theta = theta_new;
        r = r_new;
    }

    result.theta_hat = theta;
    result.fitted = theta;
    result.chi2 = chi_squared(theta, data);
    result.penalty_value = penalty(theta);
    result.objective = result.chi2 + alpha * result.penalty_value;
    result.gradient_norm = 2.0 * r.template lpNorm<Eigen::Infinity>();
    result.converged = true;
    result.n_iterations = refinements;
    return result;
}

// General penalized linear model: theta solves
//   (A^T Sigma^-1 A + alpha L^T L) theta = A^T Sigma^-1 y.
// The identity design delegates to the banded factorization.
struct LinearFit {
    Vector theta;
    Vector fitted;
    double chi2 = 0.0;
};

inline bool is_identity(const Matrix& a) {
    if (a.rows() != a.cols()) return false;
    return a == Matrix::Identity(a.rows(), a.cols());
}

inline LinearFit solve_linear_penalized(const Matrix& a, const DataSet& data, double alpha) {
    validate(data);
    if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
    if (a.rows() != static_cast<Eigen::Index>(data.size()))
        throw std::invalid_argument("design row count must match the data");

    if (is_identity(a)) {
        const FitResult r = solve_nonparametric(data, alpha);
        return {r.theta_hat, r.fitted, r.chi2};
    }

    const Eigen::Index m = a.cols();
    Matrix wa = a;
    Vector wy(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double e = data.eps[static_cast<std::size_t>(i)];
        wa.row(i) /= e;
        wy[i] = data.y[static_cast<std::size_t>(i)] / e;
    }

    if (alpha == 0.0) {
        const Eigen::ColPivHouseholderQR<Matrix> qr(wa);
        if (qr.rank() < m) throw std::runtime_error("rank-deficient design at alpha = 0");
    } else if (m < 3) {
        throw std::invalid_argument("penalized design needs at least 3 columns");
    }

    Matrix normal = wa.transpose() * wa;
    if (alpha > 0.0) normal += alpha * penalty_hessian(m);
    LinearFit fit;
    fit.theta = normal.ldlt().solve(wa.transpose() * wy);
    fit.fitted = a * fit.theta;
    fit.chi2 = chi_squared(fit.fitted, data);
    return fit;
}

// Hat matrix H = A (A^T Sigma^-1 A + alpha L^T L)^{-1} A^T Sigma^-1 with
// fitted = H y. O(N^2); materialized only on request.
inline Matrix hat_matrix_nonparametric(const std::vector<double>& eps, double alpha) {
    const auto n = static_cast<Eigen::Index>(eps.size());
    const BandedSpd g = nonparametric_normal_matrix(eps, alpha).cholesky();
    Matrix h(n, n);
    Vector col = Vector::Zero(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double e = eps[static_cast<std::size_t>(j)];
        col[j] = 1.0 / (e * e);
        h.col(j) = g.solve_factored(col);
        col[j] = 0.0;
    }
    return h;
}

inline Matrix hat_matrix(const Matrix& a, const std::vector<double>& eps, double alpha) {
    if (is_identity(a)) return hat_matrix_nonparametric(eps, alpha);
    const Eigen::Index m = a.cols();
    Matrix wa = a;
    for (Eigen::Index i = 0; i < a.rows(); ++i) wa.row(i) /= eps[static_cast<std::size_t>(i)];
    Matrix normal = wa.transpose() * wa;
    if (alpha > 0.0) {
        if (m < 3) throw std::invalid_argument("penalized design needs at least 3 columns");
        normal += alpha * penalty_hessian(m);
    }
    Matrix at_sinv(m, a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const double e = eps[static_cast<std::size_t>(i)];
        at_sinv.col(i) = a.row(i).transpose() / (e * e);
    }
    return a * normal.ldlt().solve(at_sinv);
}

// Front door: exact linear path for the non-parametric family, LM otherwise.
inline FitResult fit(const ModelSpec& spec, const DataSet& data,
                     std::optional<Vector> init = std::nullopt) {
    validate(data);
    if (spec.kind == ModelKind::NonParametric) {
        if (init && init->size() != static_cast<Eigen::Index>(data.size()))
            throw std::invalid_argument("init length must match the data");
        return solve_nonparametric(data, spec.alpha);
    }
    const Vector start = init ? *init : auto_init(spec, data);
    return fit_lm(spec, data, start);
}

} // namespace aicp
