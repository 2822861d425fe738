#pragma once

// Gauss-Hermite line profile
//
//   y0(x) = gamma/sqrt(2*pi*sigma) * exp(-u^2/2) * (1 + sum_{i>=3} h_i H_i(u)),
//   u = (x - mu)/sigma.
//
// The prefactor divides by sqrt(2*pi*sigma), with sigma inside the root.
// H_i are normalized Hermite polynomials H_i(u) = Ht_i(u)/sqrt(2^i i!)
// built on the physicists' polynomials Ht (Ht_0 = 1, Ht_1 = 2u,
// Ht_{l+1} = 2u Ht_l - 2l Ht_{l-1}).

#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace aicp {

// Fills out[0..lmax] with H_0(u)..H_lmax(u). Uses the normalized recurrence
//   H_{l+1} = sqrt(2/(l+1)) u H_l - sqrt(l/(l+1)) H_{l-1},
// which avoids the factorial overflow of the raw polynomials.
inline void hermite_normalized(int lmax, double u, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(lmax) + 1);
    out[0] = 1.0;
    if (lmax == 0) return;
    out[1] = std::numbers::sqrt2 * u;
    for (int l = 1; l < lmax; ++l) {
        out[l + 1] = std::sqrt(2.0 / (l + 1)) * u * out[l] -
                     std::sqrt(static_cast<double>(l) / (l + 1)) * out[l - 1];
    }
}

// Derivative of the normalized polynomial: H_l'(u) = sqrt(2 l) H_{l-1}(u).
inline double hermite_normalized_derivative(int l, const std::vector<double>& h_values) {
    if (l == 0) return 0.0;
    return std::sqrt(2.0 * l) * h_values[static_cast<std::size_t>(l) - 1];
}

// Generating toy model: Gaussian core plus sparse Hermite coefficients
// h[i] for orders 3 <= i <= n_gh_max.
struct GeneratingModel {
    double gamma = 1.0;
    double mu = 0.0;
    double sigma = 350.0;
    std::map<int, double> h;
    int n_gh_max = 10;
};

inline void validate(const GeneratingModel& m) {
    if (!(m.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    for (const auto& [order, coeff] : m.h) {
        (void)coeff;
        if (order < 3 || order > m.n_gh_max)
            throw std::invalid_argument("Hermite order " + std::to_string(order) +
                                        " outside [3, n_gh_max]");
    }
}

inline double eval_generating(const GeneratingModel& m, double x) {
    const double u = (x - m.mu) / m.sigma;
    const double prefactor = m.gamma / std::sqrt(2.0 * std::numbers::pi * m.sigma);
    double series = 1.0;
    if (!m.h.empty()) {
        std::vector<double> hv;
        hermite_normalized(m.n_gh_max, u, hv);
        for (const auto& [order, coeff] : m.h) series += coeff * hv[static_cast<std::size_t>(order)];
    }
    return prefactor * std::exp(-0.5 * u * u) * series;
}

// Default coefficients of the bundled toy generating model.
inline GeneratingModel toy_generating_model() {
    GeneratingModel m;
    m.gamma = 1.0;
    m.mu = 0.0;
    m.sigma = 350.0;
    m.n_gh_max = 10;
    m.h = {{3, 0.0}, {4, 0.1}, {5, 0.05}, {6, 0.1}, {7, -0.05}, {8, 0.0}, {9, 0.0}, {10, 0.2}};
    return m;
}

} // namespace aicp
