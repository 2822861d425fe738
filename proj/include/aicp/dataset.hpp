#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace aicp {

// Observed sample: abscissae x (strictly increasing), ordinates y and
// per-point noise standard deviations eps, all of equal length >= 3.
struct DataSet {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> eps;

    std::size_t size() const noexcept { return x.size(); }
};

inline void validate(const DataSet& ds) {
    const std::size_t n = ds.x.size();
    if (ds.y.size() != n || ds.eps.size() != n)
        throw std::invalid_argument("dataset arrays must have equal length");
    if (n < 3) throw std::invalid_argument("need at least 3 points");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(ds.x[i]) || !std::isfinite(ds.y[i]) || !std::isfinite(ds.eps[i]))
            throw std::invalid_argument("non-finite value at row " + std::to_string(i + 1));
        if (ds.eps[i] <= 0.0)
            throw std::invalid_argument("non-positive noise at row " + std::to_string(i + 1));
        if (i > 0 && !(ds.x[i] > ds.x[i - 1]))
            throw std::invalid_argument("x not strictly increasing at row " +
                                        std::to_string(i + 1));
    }
}

// The second-difference penalty assumes a uniform grid; reject anything else.
inline bool is_uniform_grid(const DataSet& ds, double rel_tol = 1e-8) {
    const std::size_t n = ds.x.size();
    if (n < 2) return true;
    const double step = (ds.x[n - 1] - ds.x[0]) / static_cast<double>(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(ds.x[i] - ds.x[i - 1] - step) > rel_tol * std::abs(step)) return false;
    }
    return true;
}

} // namespace aicp
