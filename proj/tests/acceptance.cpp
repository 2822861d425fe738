// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Scales: N_data = 71, N_boot <= 500, grids <= 30 points.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aicp/experiments.hpp"
#include "aicp/mock.hpp"
#include "aicp/oracle.hpp"
#include "aicp/selection.hpp"

using namespace aicp;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
                what.c_str(), detail.c_str());
    if (!pass) ++failures;
}

MockData snr100_mock(std::uint64_t seed) {
    MockConfig cfg;
    cfg.snr_peak = 100.0;
    cfg.seed = seed;
    return generate_mock(cfg);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 1. |m_eff - (n+1)| <= 0.5 for unpenalized orders 4..20 at N_boot = 500
void criterion1() {
    const auto t0 = std::chrono::steady_clock::now();
    const MockData mock = snr100_mock(42);
    const BootstrapPlan plan{500, 8};
    double worst = 0.0;
    int worst_order = 0;
    bool all_converged = true;
    for (int order = 4; order <= 20; order += 2) {
        const ModelSpec spec = ModelSpec::gauss_hermite(order);
        const FitResult fy = fit(spec, mock.data);
        all_converged = all_converged && fy.converged;
        const BootstrapSummary s = run_bootstrap(spec, mock.data, fy, plan);
        const double dev = std::abs(s.m_eff - (order + 1));
        if (dev > worst) {
            worst = dev;
            worst_order = order;
        }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "max |m_eff - (n+1)| = %.3f at order %d, runtime %.1f s", worst,
                  worst_order, seconds);
    report(1, all_converged && worst <= 0.5 && seconds <= 60.0,
           "counted-parameter recovery for unpenalized parametric fits", detail);
}

// 2. alpha = 0: chi2 exactly zero, m_eff within 71 +- 3 sqrt(2*71/500)
void criterion2() {
    MockConfig cfg;
    cfg.seed = 42;
    const MockData mock = generate_mock(cfg);
    const ModelSpec spec = ModelSpec::nonparametric(0.0);
    const FitResult fy = fit(spec, mock.data);
    const BootstrapSummary s = run_bootstrap(spec, mock.data, fy, {500, 7});
    const double band = 3.0 * std::sqrt(2.0 * 71.0 / 500.0);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "chi2 = %g, m_eff = %.3f vs 71 +- %.3f", fy.chi2,
                  s.m_eff, band);
    report(2, fy.chi2 == 0.0 && std::abs(s.m_eff - 71.0) <= band,
           "interpolation identity at alpha = 0", detail);
}

// 3. |m_eff_bootstrap - trace(H)| <= 3 sqrt(Var(m_eff)) on >= 9 of 10 grid points
void criterion3() {
    MockConfig cfg;
    cfg.seed = 42;
    const MockData mock = generate_mock(cfg);
    const auto reports = validate_bootstrap(mock.data, {500, 271828}, log_grid(1e8, 1e12, 10));
    int within = 0;
    double worst = 0.0;
    for (const auto& r : reports) {
        const double z = std::abs(r.z_score);
        worst = std::max(worst, z);
        if (z <= 3.0) ++within;
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%d of 10 within 3 sigma, worst |z| = %.2f", within,
                  worst);
    report(3, within >= 9, "bootstrap m_eff agrees with the hat-matrix trace", detail);
}

// 4. E(chi2_prior) = N and E(chi2_posterior) = N - m identities
void criterion4() {
    MockConfig cfg;
    cfg.seed = 42;
    const MockData mock = generate_mock(cfg);
    const auto zero = validate_bootstrap(mock.data, {500, 314159}, {0.0}).front();
    const double prior_band = 3.0 * std::sqrt(2.0 * 71.0 / 500.0);
    const bool zero_ok = std::abs(zero.chi2_prior_mean - 71.0) <= prior_band &&
                         zero.chi2_posterior_mean == 0.0;

    const Matrix a = polynomial_design(mock.data.x, 5);
    const OracleReport m5 = validate_linear_design(a, mock.data, {500, 161803});
    const double post_band = 3.0 * std::sqrt(2.0 * 66.0 / 500.0);
    const bool m5_ok = std::abs(m5.chi2_posterior_mean - 66.0) <= post_band;

    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "alpha=0: prior %.2f (71 +- %.2f), posterior %g; m=5: posterior %.2f "
                  "(66 +- %.2f)",
                  zero.chi2_prior_mean, prior_band, zero.chi2_posterior_mean,
                  m5.chi2_posterior_mean, post_band);
    report(4, zero_ok && m5_ok, "prior/posterior residual identities", detail);
}

// 5. order selection across 5 mocks; low orders flagged non-viable
void criterion5() {
    const std::vector<int> orders = {4, 6, 8, 10, 12, 14, 16, 18, 20};
    int picked10 = 0;
    bool low_orders_flagged = true, selected_viable = true;
    const double bound = 71.0 + 3.0 * std::sqrt(142.0);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const MockData mock = snr100_mock(seed);
        const SelectionTable t =
            scan_parametric(mock.data, orders, {500, 5000 + seed}, &mock.truth);
        if (t.selected >= 0 &&
            t.entries[static_cast<std::size_t>(t.selected)].axis_value == 10)
            ++picked10;
        if (t.selected >= 0 && !t.entries[static_cast<std::size_t>(t.selected)].viable)
            selected_viable = false;
        for (const auto& e : t.entries)
            if (e.axis_value < 10 && (e.viable || !(e.chi2 + e.m_eff > bound)))
                low_orders_flagged = false;
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "order 10 selected in %d of 5 mocks; orders < 10 non-viable in all: %s; "
                  "selected entries viable: %s",
                  picked10, low_orders_flagged ? "yes" : "no", selected_viable ? "yes" : "no");
    report(5, picked10 >= 4 && low_orders_flagged && selected_viable,
           "parametric order selection", detail);
}

// 6. AIC_p argmin within one grid step of the rms argmin on >= 4 of 5 mocks
void criterion6() {
    const auto grid = log_grid(1e3, 1e9, 25);
    int close = 0;
    int worst = 0;
    bool selected_viable = true;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const MockData mock = snr100_mock(seed);
        const SelectionTable t = scan_alpha(mock.data, grid, {500, 6000 + seed}, &mock.truth);
        int best_rms = 0;
        for (std::size_t i = 0; i < t.entries.size(); ++i)
            if (*t.entries[i].rms < *t.entries[static_cast<std::size_t>(best_rms)].rms)
                best_rms = static_cast<int>(i);
        const int dist = std::abs(t.selected - best_rms);
        worst = std::max(worst, dist);
        if (dist <= 1) ++close;
        if (!t.entries[static_cast<std::size_t>(t.selected)].viable) selected_viable = false;
    }
    char detail[140];
    std::snprintf(detail, sizeof(detail),
                  "within one step in %d of 5 mocks, worst %d steps; selected viable: %s",
                  close, worst, selected_viable ? "yes" : "no");
    report(6, close >= 4 && selected_viable, "smoothing selection tracks the best recovery",
           detail);
}

// 7. Bienayme reconstruction vs direct sample variance, 1e-9 relative
void criterion7() {
    MockConfig cfg;
    cfg.seed = 42;
    const MockData mock = generate_mock(cfg);
    bool ok = true;
    double worst = 0.0;
    for (const double alpha : {0.0, 3e8, 1e10}) {
        const ModelSpec spec = ModelSpec::nonparametric(alpha);
        const FitResult fy = fit(spec, mock.data);
        const BootstrapSummary s = run_bootstrap(spec, mock.data, fy, {50, 777});
        const ScatterEstimate est = scatter_bienayme(s);
        const double direct = *s.var_direct * s.n_used;
        const double rel =
            std::abs(est.var_meff_kappa - direct) / std::max(1.0, std::abs(direct));
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-9;
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "worst relative mismatch %.2e", worst);
    report(7, ok, "per-point scatter reconstruction is exact on samples", detail);
}

// 8. common random numbers reduce Var(dm_eff) at >= 90% of adjacent pairs
void criterion8() {
    MockConfig cfg;
    cfg.seed = 42;
    const MockData mock = generate_mock(cfg);
    const auto grid = default_alpha_grid();
    const BootstrapPlan plan{50, 888};
    std::vector<BootstrapSummary> summaries;
    for (const double alpha : grid) {
        const ModelSpec spec = ModelSpec::nonparametric(alpha);
        const FitResult fy = fit(spec, mock.data);
        summaries.push_back(run_bootstrap(spec, mock.data, fy, plan));
    }
    int reduced = 0;
    const int pairs = static_cast<int>(grid.size()) - 1;
    for (int k = 0; k < pairs; ++k) {
        const DifferenceScatter d = derivative_scatter(summaries[static_cast<std::size_t>(k)],
                                                       summaries[static_cast<std::size_t>(k) + 1]);
        if (*d.var_dm_kappa < d.var_m1_kappa + d.var_m2_kappa) ++reduced;
    }
    char detail[120];
    std::snprintf(detail, sizeof(detail), "variance reduced at %d of %d adjacent pairs",
                  reduced, pairs);
    report(8, reduced * 10 >= pairs * 9, "common-random-number variance reduction", detail);
}

// 9. argmin stability under small bootstrap budgets (default seed)
void criterion9() {
    const MockData mock = snr100_mock(42);
    const auto grid = log_grid(1e3, 1e9, 25);
    const auto argmin = [&](int n_boot) {
        const SelectionTable t = scan_alpha(mock.data, grid, {n_boot, 42});
        return t.selected;
    };
    const int idx500 = argmin(500);
    const int idx5 = argmin(5);
    const int idx1 = argmin(1);
    char detail[120];
    std::snprintf(detail, sizeof(detail), "argmin indices: N_boot 500 -> %d, 5 -> %d, 1 -> %d",
                  idx500, idx5, idx1);
    report(9, std::abs(idx5 - idx500) <= 1 && std::abs(idx1 - idx500) <= 2,
           "few-bootstrap selection robustness", detail);
}

// 10. monotonicity, the stiff-limit trace, and Jacobian accuracy
void criterion10() {
    MockConfig cfg;
    cfg.seed = 42;
    const MockData mock = generate_mock(cfg);

    bool chi2_monotone = true, trace_decreasing = true;
    double prev_chi2 = -1.0;
    double prev_trace = analytic_meff_nonparametric(mock.data.eps, 0.0);
    for (const double alpha : default_alpha_grid()) {
        const FitResult r = solve_nonparametric(mock.data, alpha);
        if (r.chi2 < prev_chi2 - 1e-9 * (1.0 + prev_chi2)) chi2_monotone = false;
        prev_chi2 = r.chi2;
        const double tr = analytic_meff_nonparametric(mock.data.eps, alpha);
        if (!(tr < prev_trace)) trace_decreasing = false;
        prev_trace = tr;
    }
    const double limit_err = std::abs(analytic_meff_nonparametric(mock.data.eps, 1e20) - 2.0);

    // analytic Jacobian vs central finite differences on the generating model
    Vector theta = Vector::Zero(11);
    theta[0] = 1.0;
    theta[2] = 350.0;
    theta[4] = 0.1;
    theta[5] = 0.05;
    theta[6] = 0.1;
    theta[7] = -0.05;
    theta[10] = 0.2;
    const ModelSpec spec = ModelSpec::gauss_hermite(10);
    const Matrix jac = model_jacobian(spec, theta, mock.data.x);
    double worst_jac = 0.0;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
        const double h = 1e-6 * (1.0 + std::abs(theta[k]));
        Vector tp = theta, tm = theta;
        tp[k] += h;
        tm[k] -= h;
        const Vector fp = model_values(spec, tp, mock.data.x);
        const Vector fm = model_values(spec, tm, mock.data.x);
        const Vector fd = (fp - fm) / (2.0 * h);
        const double scale = std::max(fd.lpNorm<Eigen::Infinity>(), 1e-300);
        for (Eigen::Index i = 0; i < fp.size(); ++i)
            worst_jac = std::max(worst_jac, std::abs(jac(i, k) - fd[i]) / scale);
    }
    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "chi2 monotone: %s; trace strictly decreasing: %s; |trace(1e20) - 2| = "
                  "%.2e; worst Jacobian rel err %.2e",
                  chi2_monotone ? "yes" : "no", trace_decreasing ? "yes" : "no", limit_err,
                  worst_jac);
    report(10,
           chi2_monotone && trace_decreasing && limit_err <= 1e-6 && worst_jac <= 1e-6,
           "monotonicity and derivative checks", detail);
}

// 11. figure suite reruns are byte-identical
void criterion11() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "aicp_acceptance_figs";
    fs::remove_all(base);
    ExperimentConfig cfg;
    cfg.n_mocks = 2;
    cfg.n_mocks_avg = 2;
    cfg.orders = {4, 6, 8, 10, 12};
    cfg.alpha_grid = log_grid(1e3, 1e9, 9);
    cfg.n_boot_ladder = {1, 5, 50};
    cfg.n_boot = 50;
    cfg.master_seed = 42;
    cfg.output_dir = base / "run1";
    run_figure_suite(cfg);
    cfg.output_dir = base / "run2";
    run_figure_suite(cfg);

    bool identical = true;
    int compared = 0;
    std::string first_diff;
    for (const auto& entry : fs::recursive_directory_iterator(base / "run1")) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), base / "run1");
        ++compared;
        if (slurp(entry.path()) != slurp(base / "run2" / rel)) {
            identical = false;
            if (first_diff.empty()) first_diff = rel.string();
        }
    }
    fs::remove_all(base);
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%d files compared%s%s", compared,
                  identical ? "" : ", first difference: ", first_diff.c_str());
    report(11, identical && compared > 0, "figure suite reruns are byte-identical", detail);
}

} // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s: %d of 11 criteria passed in %.1f s\n", failures == 0 ? "OK" : "FAILED",
                11 - failures, seconds);
    return failures == 0 ? 0 : 1;
}
