#include <catch2/catch.hpp>

#include <cmath>
#include <numbers>

#include "aicp/gauss_hermite.hpp"

using namespace aicp;

namespace {

// values pinned from an independent 40-digit evaluation of the profile
constexpr double kPureGaussianPeak = 0.021324361862292308;  // 1/sqrt(2 pi 350)
constexpr double kTable1At0 = 0.019322427997793027;
constexpr double kTable1At500 = 0.0033020105793936256;
constexpr double kTable1AtMinus280 = 0.017204513230584307;

} // namespace

TEST_CASE("pure Gaussian peak value matches the printed prefactor") {
    GeneratingModel m;
    m.gamma = 1.0;
    m.mu = 0.0;
    m.sigma = 350.0;
    m.h.clear();
    const double v = eval_generating(m, 0.0);
    CHECK(v == Approx(1.0 / std::sqrt(2.0 * std::numbers::pi * 350.0)).epsilon(1e-15));
    CHECK(v == Approx(kPureGaussianPeak).epsilon(1e-14));
}

TEST_CASE("even-order models are symmetric about the center") {
    GeneratingModel m;
    m.sigma = 350.0;
    m.mu = 120.0;
    m.h = {{4, 0.1}, {6, -0.07}, {10, 0.2}};
    for (const double d : {350.0, 100.0, 777.0, 1234.5}) {
        CHECK(eval_generating(m, m.mu + d) ==
              Approx(eval_generating(m, m.mu - d)).epsilon(1e-13));
    }
}

TEST_CASE("toy model evaluations match the high-precision pins") {
    const GeneratingModel m = toy_generating_model();
    CHECK(eval_generating(m, 0.0) == Approx(kTable1At0).epsilon(1e-14));
    CHECK(eval_generating(m, 500.0) == Approx(kTable1At500).epsilon(1e-14));
    CHECK(eval_generating(m, -280.0) == Approx(kTable1AtMinus280).epsilon(1e-14));
}

TEST_CASE("normalized Hermite recurrence matches explicit low orders") {
    // H_3(u) = (8u^3 - 12u)/sqrt(48), H_4(u) = (16u^4 - 48u^2 + 12)/sqrt(384)
    std::vector<double> hv;
    for (const double u : {-1.7, -0.3, 0.0, 0.9, 2.4}) {
        hermite_normalized(4, u, hv);
        CHECK(hv[3] == Approx((8 * u * u * u - 12 * u) / std::sqrt(48.0)).margin(1e-14));
        CHECK(hv[4] ==
              Approx((16 * u * u * u * u - 48 * u * u + 12) / std::sqrt(384.0)).margin(1e-13));
    }
}

TEST_CASE("generating model validation") {
    GeneratingModel m = toy_generating_model();
    m.sigma = 0.0;
    CHECK_THROWS_AS(validate(m), std::invalid_argument);
    m = toy_generating_model();
    m.h[11] = 0.3; // above n_gh_max
    CHECK_THROWS_AS(validate(m), std::invalid_argument);
    m = toy_generating_model();
    m.h[2] = 0.3; // below the series start
    CHECK_THROWS_AS(validate(m), std::invalid_argument);
}
