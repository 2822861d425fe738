#include <catch2/catch.hpp>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "aicp/experiments.hpp"
#include "test_helpers.hpp"

using namespace aicp;
using test_helpers::TempDir;

namespace {

ExperimentConfig tiny_config(const std::filesystem::path& outdir) {
    ExperimentConfig cfg;
    cfg.n_mocks = 1;
    cfg.n_mocks_avg = 2;
    cfg.orders = {4, 6};
    cfg.alpha_grid = log_grid(1e4, 1e8, 5);
    cfg.n_boot_ladder = {1, 5};
    cfg.n_boot = 10;
    cfg.master_seed = 20260808;
    cfg.output_dir = outdir;
    return cfg;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// parse one numeric column of a figure CSV by header name
std::vector<double> column(const std::filesystem::path& p, const std::string& name) {
    std::ifstream in(p);
    REQUIRE(in);
    std::string header;
    std::getline(in, header);
    std::vector<std::string> cols;
    {
        std::istringstream hs(header);
        std::string tok;
        while (std::getline(hs, tok, ',')) cols.push_back(tok);
    }
    const auto it = std::find(cols.begin(), cols.end(), name);
    REQUIRE(it != cols.end());
    const auto idx = static_cast<std::size_t>(it - cols.begin());
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        std::size_t k = 0;
        double v = std::numeric_limits<double>::quiet_NaN();
        while (std::getline(ls, tok, ',')) {
            if (k == idx && !tok.empty()) v = std::stod(tok);
            ++k;
        }
        values.push_back(v);
    }
    return values;
}

} // namespace

TEST_CASE("figure suite produces the expected bundle layout") {
    TempDir dir("figs");
    const ExperimentConfig cfg = tiny_config(dir.path());
    run_figure_suite(cfg);

    CHECK(std::filesystem::exists(dir.path() / "manifest.json"));
    CHECK(std::filesystem::exists(dir.path() / "fig3" / "meff_vs_order.csv"));
    CHECK(std::filesystem::exists(dir.path() / "fig4" / "parametric_mock1.csv"));
    CHECK(std::filesystem::exists(dir.path() / "fig4" / "nonparametric_mock1.csv"));
    CHECK(std::filesystem::exists(dir.path() / "fig5" / "parametric_mock1.csv"));
    CHECK(std::filesystem::exists(dir.path() / "fig6" / "nboot1.csv"));
    CHECK(std::filesystem::exists(dir.path() / "fig6" / "nboot5.csv"));
    CHECK(std::filesystem::exists(dir.path() / "fig7" / "nboot1_mock1.csv"));
    CHECK(std::filesystem::exists(dir.path() / "fig8" / "parametric_mock2.csv"));
    CHECK(std::filesystem::exists(dir.path() / "fig8" / "parametric_avg.csv"));

    const auto manifest = nlohmann::json::parse(slurp(dir.path() / "manifest.json"));
    CHECK(manifest["config"]["master_seed"] == 20260808);
    for (const int fig : {3, 4, 5, 6, 7, 8})
        CHECK(manifest["status"]["fig" + std::to_string(fig)] == "ok");

    // scan bundles carry the (chi2, m_eff, chi2 + m_eff) triple
    const auto chi2 = column(dir.path() / "fig4" / "parametric_mock1.csv", "chi2");
    const auto meff = column(dir.path() / "fig4" / "parametric_mock1.csv", "m_eff");
    const auto sum = column(dir.path() / "fig4" / "parametric_mock1.csv", "chi2_plus_meff");
    REQUIRE(chi2.size() == 2);
    for (std::size_t i = 0; i < chi2.size(); ++i)
        CHECK(sum[i] == Approx(chi2[i] + meff[i]).epsilon(1e-12));
}

TEST_CASE("figure suite is byte-identical across reruns") {
    TempDir a("figs_a"), b("figs_b");
    ExperimentConfig cfg = tiny_config(a.path());
    run_figure_suite(cfg);
    cfg.output_dir = b.path();
    run_figure_suite(cfg);

    for (auto& entry : std::filesystem::recursive_directory_iterator(a.path())) {
        if (!entry.is_regular_file()) continue;
        const auto rel = std::filesystem::relative(entry.path(), a.path());
        INFO(rel.string());
        CHECK(slurp(entry.path()) == slurp(b.path() / rel));
    }
}

TEST_CASE("counted parameters land on the reference line in fig3") {
    TempDir dir("fig3");
    ExperimentConfig cfg = tiny_config(dir.path());
    cfg.figures = {3};
    cfg.orders = {4, 6, 8};
    cfg.n_boot = 150;
    run_figure_suite(cfg);
    const auto path = dir.path() / "fig3" / "meff_vs_order.csv";
    const auto meff = column(path, "m_eff");
    const auto counted = column(path, "counted");
    REQUIRE(meff.size() == 3);
    for (std::size_t i = 0; i < meff.size(); ++i)
        CHECK(std::abs(meff[i] - counted[i]) < 0.5);
}

TEST_CASE("selection from few bootstrap iterations matches the full budget") {
    TempDir dir("fig6");
    ExperimentConfig cfg = tiny_config(dir.path());
    cfg.figures = {6};
    cfg.alpha_grid = log_grid(1e2, 1e9, 25);
    cfg.n_boot_ladder = {1, 5, 500};
    run_figure_suite(cfg);

    const auto selected_index = [&](const std::string& name) {
        const auto sel = column(dir.path() / "fig6" / name, "selected");
        for (std::size_t i = 0; i < sel.size(); ++i)
            if (sel[i] == 1.0) return static_cast<int>(i);
        return -1;
    };
    const int idx500 = selected_index("nboot500.csv");
    const int idx5 = selected_index("nboot5.csv");
    const int idx1 = selected_index("nboot1.csv");
    REQUIRE(idx500 >= 0);
    CHECK(std::abs(idx5 - idx500) <= 1);
    CHECK(std::abs(idx1 - idx500) <= 2);
}

TEST_CASE("mock averages smooth the jagged per-mock chi2 curves") {
    TempDir dir("fig8");
    ExperimentConfig cfg = tiny_config(dir.path());
    cfg.figures = {8};
    cfg.orders = {4, 6, 8, 10, 12, 14};
    cfg.n_mocks_avg = 5;
    cfg.n_boot = 60;
    run_figure_suite(cfg);
    const auto avg = column(dir.path() / "fig8" / "parametric_avg.csv", "chi2_mean");
    REQUIRE(avg.size() == 6);
    for (std::size_t k = 1; k < avg.size(); ++k)
        CHECK(avg[k] <= avg[k - 1] + 1e-6 * (1.0 + avg[k - 1]));
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg;
    cfg.output_dir = "";
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg.output_dir = "/tmp/x";
    cfg.n_mocks = 0;
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
    cfg.n_mocks = 1;
    cfg.n_boot_ladder = {5, 0};
    CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
}
