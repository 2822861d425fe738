#include <catch2/catch.hpp>

#include <cmath>

#include "aicp/oracle.hpp"
#include "aicp/selection.hpp"
#include "test_helpers.hpp"

using namespace aicp;

TEST_CASE("identity design traces") {
    const MockData mock = test_helpers::fig1_mock();
    CHECK(analytic_meff_nonparametric(mock.data.eps, 0.0) == Approx(71.0).margin(1e-10));
    // stiff limit: only the affine null space survives
    CHECK(analytic_meff_nonparametric(mock.data.eps, 1e20) == Approx(2.0).margin(1e-6));
}

TEST_CASE("unpenalized linear designs count their columns") {
    const MockData mock = test_helpers::fig1_mock();
    for (const int m : {2, 5, 8}) {
        const Matrix a = polynomial_design(mock.data.x, m);
        CHECK(analytic_meff(a, mock.data.eps, 0.0) == Approx(m).margin(1e-8));
    }
}

TEST_CASE("the two cross-check routes agree to 1e-10") {
    const MockData mock = test_helpers::fig1_mock();
    for (const double alpha : log_grid(1e8, 1e12, 10)) {
        const double inv = trace_hat_full_inverse(mock.data.eps, alpha);
        const double col = trace_hat_column_solves(mock.data.eps, alpha);
        CHECK(inv == Approx(col).margin(1e-10));
        CHECK(analytic_meff_nonparametric(mock.data.eps, alpha) ==
              Approx(inv).margin(1e-8));
    }
}

TEST_CASE("trace decreases strictly along any increasing grid") {
    const MockData mock = test_helpers::fig1_mock();
    double prev = analytic_meff_nonparametric(mock.data.eps, 0.0);
    for (const double alpha : log_grid(1e5, 1e14, 12)) {
        const double t = analytic_meff_nonparametric(mock.data.eps, alpha);
        CHECK(t < prev);
        prev = t;
    }
}

TEST_CASE("interpolation identities at alpha zero") {
    const MockData mock = test_helpers::fig1_mock();
    const auto reports = validate_bootstrap(mock.data, {500, 123}, {0.0});
    REQUIRE(reports.size() == 1);
    const auto& r = reports[0];
    CHECK(r.m_eff_analytic == Approx(71.0).margin(1e-10));
    CHECK(r.chi2_prior_mean == Approx(71.0).margin(3.0 * std::sqrt(2.0 * 71.0 / 500.0)));
    CHECK(r.chi2_posterior_mean == 0.0);
    // prior minus posterior reproduces the bootstrap m_eff exactly here
    CHECK(r.chi2_prior_mean - r.chi2_posterior_mean == Approx(r.m_eff_bootstrap).margin(1e-9));
}

TEST_CASE("bootstrap agrees with the oracle across the grid") {
    const MockData mock = test_helpers::fig1_mock();
    const auto reports = validate_bootstrap(mock.data, {300, 2718}, log_grid(1e8, 1e12, 6));
    int within = 0;
    for (const auto& r : reports) {
        REQUIRE(std::isfinite(r.z_score));
        if (std::abs(r.z_score) <= 3.0) ++within;
        // penalized case: both residual summaries are recorded; no equality
        // between their difference and m_eff is claimed
        CHECK(std::isfinite(r.chi2_prior_mean));
        CHECK(std::isfinite(r.chi2_posterior_mean));
    }
    CHECK(within >= 5);
}

TEST_CASE("general design bootstrap matches the counted columns") {
    const MockData mock = test_helpers::fig1_mock();
    const Matrix a = polynomial_design(mock.data.x, 5);
    const OracleReport r = validate_linear_design(a, mock.data, {500, 31415});
    CHECK(r.m_eff_analytic == Approx(5.0).margin(1e-8));
    CHECK(std::abs(r.z_score) <= 3.0);
    // posterior residuals follow chi-squared with N - m degrees of freedom
    CHECK(r.chi2_posterior_mean ==
          Approx(66.0).margin(3.0 * std::sqrt(2.0 * 66.0 / 500.0)));
    CHECK(r.chi2_prior_mean == Approx(71.0).margin(3.0 * std::sqrt(2.0 * 71.0 / 500.0)));
}

TEST_CASE("oracle csv schema") {
    std::vector<OracleReport> reports(1);
    reports[0] = {1e9, 4.0, 4.1, 0.5, 75.0, 71.0};
    std::ostringstream out;
    write_oracle_csv(reports, out);
    const std::string text = out.str();
    CHECK(text.rfind("alpha,meff_analytic,meff_bootstrap,z_score,chi2_prior,chi2_posterior\n",
                     0) == 0);
}

TEST_CASE("polynomial design validation") {
    const MockData mock = test_helpers::fig1_mock();
    CHECK_THROWS_AS(polynomial_design(mock.data.x, 0), std::invalid_argument);
    const Matrix a = polynomial_design(mock.data.x, 3);
    CHECK(a.rows() == 71);
    CHECK(a.cols() == 3);
    CHECK(a.col(0).isOnes());
}
