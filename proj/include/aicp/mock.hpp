#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aicp/dataset.hpp"
#include "aicp/gauss_hermite.hpp"
#include "aicp/rng.hpp"

namespace aicp {

struct MockConfig {
    GeneratingModel generating = toy_generating_model();
    std::size_t n_data = 71;
    double x_range_sigmas = 8.0; // half-width of the grid in units of sigma
    double snr_peak = 10.0;      // signal-to-noise at the realized profile peak
    std::uint64_t seed = 0;
};

inline void validate(const MockConfig& cfg) {
    validate(cfg.generating);
    if (cfg.n_data < 3) throw std::invalid_argument("need at least 3 points");
    if (!(cfg.snr_peak > 0.0)) throw std::invalid_argument("snr_peak must be positive");
    if (!(cfg.x_range_sigmas > 0.0)) throw std::invalid_argument("x_range_sigmas must be positive");
}

struct MockData {
    DataSet data;
    std::vector<double> truth; // noise-free generating values on the grid
};

// Evenly spaced grid over [mu - R*sigma, mu + R*sigma]; constant noise level
// eps = (peak of truth)/snr_peak; Gaussian noise drawn from the seed's mock
// stream. Pure function of the config.
inline MockData generate_mock(const MockConfig& cfg) {
    validate(cfg);
    const std::size_t n = cfg.n_data;
    const double half = cfg.x_range_sigmas * cfg.generating.sigma;
    const double lo = cfg.generating.mu - half;
    const double step = 2.0 * half / static_cast<double>(n - 1);

    MockData out;
    out.data.x.resize(n);
    out.truth.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.data.x[i] = lo + static_cast<double>(i) * step;
        out.truth[i] = eval_generating(cfg.generating, out.data.x[i]);
    }

    const double peak = *std::max_element(out.truth.begin(), out.truth.end());
    if (!(peak > 0.0)) throw std::invalid_argument("generating model peak must be positive");
    const double eps = peak / cfg.snr_peak;

    GaussianStream noise = gaussian_stream(cfg.seed, StreamDomain::MockNoise, 0);
    out.data.y.resize(n);
    out.data.eps.assign(n, eps);
    for (std::size_t i = 0; i < n; ++i) out.data.y[i] = out.truth[i] + eps * noise.next();

    validate(out.data);
    return out;
}

} // namespace aicp
