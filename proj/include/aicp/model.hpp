#pragma once

// The two model families behind one interface: values, Jacobian, penalty.
//
// GaussHermite(n):  theta = (gamma, mu, sigma, h_3, ..., h_n), n+1 parameters,
//                   f(x; theta) is the Gauss-Hermite series. Never penalized.
// NonParametric:    theta_i is the model value at x_i directly (identity map,
//                   df_i/dtheta_j = delta_ij), penalized with strength alpha.

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "aicp/dataset.hpp"
#include "aicp/gauss_hermite.hpp"
#include "aicp/penalty.hpp"

namespace aicp {

enum class ModelKind { GaussHermite, NonParametric };

struct ModelSpec {
    ModelKind kind = ModelKind::NonParametric;
    int n_gh = 0;       // GaussHermite only; highest Hermite order
    double alpha = 0.0; // penalty strength; forced to 0 for the parametric family

    static ModelSpec gauss_hermite(int order) {
        if (order < 2) throw std::invalid_argument("Gauss-Hermite order must be >= 2");
        return {ModelKind::GaussHermite, order, 0.0};
    }
    static ModelSpec nonparametric(double alpha) {
        if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
        return {ModelKind::NonParametric, 0, alpha};
    }
};

inline std::size_t param_count(const ModelSpec& spec, std::size_t n_data) {
    return spec.kind == ModelKind::GaussHermite ? static_cast<std::size_t>(spec.n_gh) + 1
                                                : n_data;
}

inline void check_theta(const ModelSpec& spec, const Vector& theta, std::size_t n_x) {
    if (theta.size() != static_cast<Eigen::Index>(param_count(spec, n_x)))
        throw std::invalid_argument("parameter vector has length " +
                                    std::to_string(theta.size()) + ", expected " +
                                    std::to_string(param_count(spec, n_x)));
    if (spec.kind == ModelKind::GaussHermite && !(theta[2] > 0.0))
        throw std::invalid_argument("sigma component must be positive");
}

namespace detail {

struct GhPoint {
    double value;
    double envelope;  // gamma/sqrt(2 pi sigma) * exp(-u^2/2)
    double series;    // 1 + sum h_i H_i(u)
    double dseries;   // sum h_i H_i'(u)
    double u;
};

inline GhPoint gh_point(const Vector& theta, int n_gh, double x, std::vector<double>& hbuf) {
    const double gamma = theta[0], mu = theta[1], sigma = theta[2];
    const double u = (x - mu) / sigma;
    const double envelope =
        gamma / std::sqrt(2.0 * std::numbers::pi * sigma) * std::exp(-0.5 * u * u);
    hermite_normalized(n_gh, u, hbuf);
    double series = 1.0, dseries = 0.0;
    for (int l = 3; l <= n_gh; ++l) {
        const double h = theta[l]; // theta = (gamma, mu, sigma, h_3..h_n), so h_l sits at index l
        series += h * hbuf[static_cast<std::size_t>(l)];
        dseries += h * hermite_normalized_derivative(l, hbuf);
    }
    return {envelope * series, envelope, series, dseries, u};
}

} // namespace detail

inline Vector model_values(const ModelSpec& spec, const Vector& theta,
                           const std::vector<double>& x) {
    check_theta(spec, theta, x.size());
    if (spec.kind == ModelKind::NonParametric) return theta;
    Vector f(static_cast<Eigen::Index>(x.size()));
    std::vector<double> hbuf;
    for (std::size_t i = 0; i < x.size(); ++i)
        f[static_cast<Eigen::Index>(i)] = detail::gh_point(theta, spec.n_gh, x[i], hbuf).value;
    return f;
}

// Analytic partials. Columns follow the theta layout.
inline Matrix model_jacobian(const ModelSpec& spec, const Vector& theta,
                             const std::vector<double>& x) {
    check_theta(spec, theta, x.size());
    const auto n = static_cast<Eigen::Index>(x.size());
    if (spec.kind == ModelKind::NonParametric) return Matrix::Identity(n, n);

    const double gamma = theta[0], sigma = theta[2];
    Matrix jac(n, theta.size());
    std::vector<double> hbuf;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto p = detail::gh_point(theta, spec.n_gh, x[static_cast<std::size_t>(i)], hbuf);
        // dE/du = -u E; du/dmu = -1/sigma; du/dsigma = -u/sigma
        const double dvalue_du = p.envelope * (-p.u * p.series + p.dseries);
        jac(i, 0) = p.value / gamma;
        jac(i, 1) = dvalue_du * (-1.0 / sigma);
        jac(i, 2) = dvalue_du * (-p.u / sigma) + p.value * (-0.5 / sigma);
        for (int l = 3; l <= spec.n_gh; ++l)
            jac(i, l) = p.envelope * hbuf[static_cast<std::size_t>(l)];
    }
    return jac;
}

// Moment-matching start for the parametric family: gamma from the summed
// signal, mu and sigma from |y|-weighted moments of x, Hermite terms zero.
inline Vector auto_init(const ModelSpec& spec, const DataSet& data) {
    if (spec.kind == ModelKind::NonParametric) {
        Vector theta(static_cast<Eigen::Index>(data.size()));
        for (std::size_t i = 0; i < data.size(); ++i)
            theta[static_cast<Eigen::Index>(i)] = data.y[i];
        return theta;
    }

    const std::size_t n = data.size();
    double wsum = 0.0, xmean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = std::abs(data.y[i]);
        wsum += w;
        xmean += w * data.x[i];
    }
    const double span = data.x[n - 1] - data.x[0];
    double mu = 0.5 * (data.x[0] + data.x[n - 1]);
    double sigma = span / 8.0;
    if (wsum > 0.0) {
        mu = xmean / wsum;
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            var += std::abs(data.y[i]) * (data.x[i] - mu) * (data.x[i] - mu);
        var /= wsum;
        if (var > 0.0) sigma = std::sqrt(var);
    }
    sigma = std::min(std::max(sigma, span * 1e-3), span);

    double gamma = 0.0;
    const double dx = span / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) gamma += data.y[i] * dx;
    // the profile integrates to gamma*sqrt(sigma) under this normalization
    gamma /= std::sqrt(sigma);
    if (!(std::abs(gamma) > 0.0)) gamma = 1.0;

    Vector theta = Vector::Zero(spec.n_gh + 1);
    theta[0] = gamma;
    theta[1] = mu;
    theta[2] = sigma;
    return theta;
}

} // namespace aicp
