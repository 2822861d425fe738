#pragma once

// Second-difference roughness penalty
//
//   P(f) = sum_{i=1}^{N-2} (f[i+1] - 2 f[i] + f[i-1])^2   (0-based interior)
//
// equivalently P = |L f|^2 with L the (N-2) x N banded operator whose rows
// are (1, -2, 1). Differences are unit-spaced; the smoothing strength alpha
// absorbs any grid scale. Null space of L is the affine sequences, so
// P >= 0 with equality exactly for straight lines.

#include <Eigen/Dense>
#include <stdexcept>

namespace aicp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline void require_penalty_length(Eigen::Index n) {
    if (n < 3) throw std::invalid_argument("penalty needs at least 3 values");
}

inline double penalty(const Vector& f) {
    require_penalty_length(f.size());
    double sum = 0.0;
    for (Eigen::Index i = 1; i + 1 < f.size(); ++i) {
        const double d = f[i + 1] - 2.0 * f[i] + f[i - 1];
        sum += d * d;
    }
    return sum;
}

// L f, the vector of interior second differences.
inline Vector apply_second_difference(const Vector& f) {
    require_penalty_length(f.size());
    Vector out(f.size() - 2);
    for (Eigen::Index i = 1; i + 1 < f.size(); ++i)
        out[i - 1] = f[i + 1] - 2.0 * f[i] + f[i - 1];
    return out;
}

// L^T g for g of length N-2.
inline Vector apply_second_difference_transpose(const Vector& g, Eigen::Index n) {
    require_penalty_length(n);
    if (g.size() != n - 2) throw std::invalid_argument("second-difference length mismatch");
    Vector out = Vector::Zero(n);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        out[k] += g[k];
        out[k + 1] -= 2.0 * g[k];
        out[k + 2] += g[k];
    }
    return out;
}

// L^T L f in factored form; keeps cancellation ahead of any large scale factor.
inline Vector apply_penalty_hessian(const Vector& f) {
    return apply_second_difference_transpose(apply_second_difference(f), f.size());
}

// grad P = 2 L^T L f
inline Vector penalty_gradient(const Vector& f) { return 2.0 * apply_penalty_hessian(f); }

inline Matrix second_difference_matrix(Eigen::Index n) {
    require_penalty_length(n);
    Matrix l = Matrix::Zero(n - 2, n);
    for (Eigen::Index k = 0; k + 2 < n; ++k) {
        l(k, k) = 1.0;
        l(k, k + 1) = -2.0;
        l(k, k + 2) = 1.0;
    }
    return l;
}

// L^T L: constant, banded (bandwidth 2), positive semidefinite with a
// two-dimensional affine null space.
inline Matrix penalty_hessian(Eigen::Index n) {
    const Matrix l = second_difference_matrix(n);
    return l.transpose() * l;
}

} // namespace aicp
