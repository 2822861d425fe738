#pragma once

// Symmetric positive definite band matrix with Cholesky factorization.
// Lower band storage: entry (i, j) with 0 <= i - j <= bandwidth lives at
// band_[(i - j) * n + j]. Factor and solves are O(n * bandwidth^2).

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace aicp {

class BandedSpd {
  public:
    BandedSpd(std::size_t n, std::size_t bandwidth)
        : n_(n), bw_(bandwidth), band_((bandwidth + 1) * n, 0.0) {
        if (bandwidth >= n) throw std::invalid_argument("bandwidth must be < n");
    }

    std::size_t size() const noexcept { return n_; }
    std::size_t bandwidth() const noexcept { return bw_; }

    // i >= j and i - j <= bandwidth
    double& lower(std::size_t i, std::size_t j) { return band_[(i - j) * n_ + j]; }
    double lower(std::size_t i, std::size_t j) const { return band_[(i - j) * n_ + j]; }

    void add_symmetric(std::size_t i, std::size_t j, double v) {
        if (i < j) std::swap(i, j);
        band_[(i - j) * n_ + j] += v;
    }

    // In-place Cholesky M = G G^T with G lower banded. Throws if a pivot
    // is not strictly positive.
    BandedSpd cholesky() const {
        BandedSpd g(*this);
        for (std::size_t j = 0; j < n_; ++j) {
            double d = g.lower(j, j);
            const std::size_t kmin = j > bw_ ? j - bw_ : 0;
            for (std::size_t k = kmin; k < j; ++k) {
                const double gjk = g.lower(j, k);
                d -= gjk * gjk;
            }
            if (!(d > 0.0)) throw std::runtime_error("matrix not positive definite");
            const double djj = std::sqrt(d);
            g.lower(j, j) = djj;
            const std::size_t imax = std::min(j + bw_, n_ - 1);
            for (std::size_t i = j + 1; i <= imax; ++i) {
                double s = g.lower(i, j);
                const std::size_t k0 = i > bw_ ? i - bw_ : 0;
                for (std::size_t k = std::max(k0, kmin); k < j; ++k)
                    s -= g.lower(i, k) * g.lower(j, k);
                g.lower(i, j) = s / djj;
            }
        }
        return g;
    }

    // Solve M x = b given the Cholesky factor (this object must hold G).
    Eigen::VectorXd solve_factored(const Eigen::VectorXd& b) const {
        if (static_cast<std::size_t>(b.size()) != n_)
            throw std::invalid_argument("right-hand side length mismatch");
        Eigen::VectorXd z(b);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = z[static_cast<Eigen::Index>(i)];
            const std::size_t k0 = i > bw_ ? i - bw_ : 0;
            for (std::size_t k = k0; k < i; ++k)
                s -= lower(i, k) * z[static_cast<Eigen::Index>(k)];
            z[static_cast<Eigen::Index>(i)] = s / lower(i, i);
        }
        for (std::size_t ii = n_; ii-- > 0;) {
            double s = z[static_cast<Eigen::Index>(ii)];
            const std::size_t imax = std::min(ii + bw_, n_ - 1);
            for (std::size_t i = ii + 1; i <= imax; ++i)
                s -= lower(i, ii) * z[static_cast<Eigen::Index>(i)];
            z[static_cast<Eigen::Index>(ii)] = s / lower(ii, ii);
        }
        return z;
    }

    Eigen::VectorXd multiply(const Eigen::VectorXd& v) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            out[static_cast<Eigen::Index>(j)] += lower(j, j) * v[static_cast<Eigen::Index>(j)];
            const std::size_t imax = std::min(j + bw_, n_ - 1);
            for (std::size_t i = j + 1; i <= imax; ++i) {
                const double m = lower(i, j);
                out[static_cast<Eigen::Index>(i)] += m * v[static_cast<Eigen::Index>(j)];
                out[static_cast<Eigen::Index>(j)] += m * v[static_cast<Eigen::Index>(i)];
            }
        }
        return out;
    }

    Eigen::MatrixXd to_dense() const {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_),
                                                  static_cast<Eigen::Index>(n_));
        for (std::size_t j = 0; j < n_; ++j) {
            m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = lower(j, j);
            const std::size_t imax = std::min(j + bw_, n_ - 1);
            for (std::size_t i = j + 1; i <= imax; ++i) {
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lower(i, j);
                m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = lower(i, j);
            }
        }
        return m;
    }

  private:
    std::size_t n_, bw_;
    std::vector<double> band_;
};

// Normal matrix of the penalized non-parametric fit,
//   M = Sigma^{-1} + alpha * L^T L,
// pentadiagonal since L has rows (1, -2, 1).
inline BandedSpd nonparametric_normal_matrix(const std::vector<double>& eps, double alpha) {
    const std::size_t n = eps.size();
    BandedSpd m(n, 2);
    for (std::size_t i = 0; i < n; ++i) m.lower(i, i) = 1.0 / (eps[i] * eps[i]);
    // assemble alpha * L^T L row by row of L
    for (std::size_t k = 0; k + 2 < n; ++k) {
        const std::size_t idx[3] = {k, k + 1, k + 2};
        const double coef[3] = {1.0, -2.0, 1.0};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b <= a; ++b)
                m.add_symmetric(idx[a], idx[b], alpha * coef[a] * coef[b]);
    }
    return m;
}

} // namespace aicp
