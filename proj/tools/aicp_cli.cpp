// aicp command line front end.
//
// Subcommands: mockgen, fit, scan, oracle, figures. Every stochastic command
// requires an explicit --seed; there is no implicit random seeding. Outputs
// are CSV in the documented schemas plus JSON mirrors or sidecar manifests
// carrying the effective configuration hash and master seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "aicp/bootstrap.hpp"
#include "aicp/dataset_io.hpp"
#include "aicp/experiments.hpp"
#include "aicp/mock.hpp"
#include "aicp/oracle.hpp"
#include "aicp/selection.hpp"
#include "aicp/solver.hpp"

namespace {

using nlohmann::ordered_json;

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string config_hash(const CLI::App& cmd) {
    std::ostringstream ss;
    ss << cmd.get_name() << '\n' << cmd.config_to_str(true, false);
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(ss.str())));
    return buf;
}

std::vector<int> parse_order_range(const std::string& text) {
    // "lo:hi:step" or a comma separated list
    std::vector<int> orders;
    if (text.find(':') != std::string::npos) {
        int lo = 0, hi = 0, step = 2;
        if (std::sscanf(text.c_str(), "%d:%d:%d", &lo, &hi, &step) != 3 || step <= 0)
            throw CLI::ValidationError("--orders", "expected lo:hi:step");
        for (int o = lo; o <= hi; o += step) orders.push_back(o);
    } else {
        std::istringstream ss(text);
        std::string tok;
        while (std::getline(ss, tok, ',')) orders.push_back(std::stoi(tok));
    }
    if (orders.empty()) throw CLI::ValidationError("--orders", "empty order list");
    return orders;
}

std::vector<double> parse_alpha_grid(const std::string& text) {
    // "lo:hi:n" log-spaced, or a comma separated list
    if (text.find(':') != std::string::npos) {
        double lo = 0.0, hi = 0.0;
        int n = 0;
        if (std::sscanf(text.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3)
            throw CLI::ValidationError("--alpha-grid", "expected lo:hi:npoints");
        return aicp::log_grid(lo, hi, n);
    }
    std::vector<double> grid;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) grid.push_back(std::stod(tok));
    if (grid.empty()) throw CLI::ValidationError("--alpha-grid", "empty grid");
    return grid;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    std::istringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) values.push_back(std::stoi(tok));
    return values;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_sidecar_manifest(const std::filesystem::path& target, const std::string& command,
                            const std::string& hash, std::optional<std::uint64_t> seed,
                            const std::vector<std::string>& files) {
    ordered_json j;
    j["command"] = command;
    j["config_hash"] = hash;
    if (seed) j["master_seed"] = *seed;
    j["files"] = files;
    std::filesystem::path p = target;
    p += ".manifest.json";
    write_text(p, j.dump(2) + "\n");
}

ordered_json fit_result_json(const aicp::FitResult& r) {
    ordered_json j;
    j["converged"] = r.converged;
    j["chi2"] = r.chi2;
    j["penalty_value"] = r.penalty_value;
    j["objective"] = r.objective;
    j["gradient_norm"] = r.gradient_norm;
    j["n_iterations"] = r.n_iterations;
    j["theta_hat"] = std::vector<double>(r.theta_hat.begin(), r.theta_hat.end());
    j["fitted"] = std::vector<double>(r.fitted.begin(), r.fitted.end());
    return j;
}

ordered_json selection_table_json(const aicp::SelectionTable& t, const std::string& hash) {
    ordered_json j;
    j["scan_axis"] = t.axis == aicp::ScanAxis::Order ? "order" : "log10_alpha_s";
    j["n_data"] = t.n_data;
    j["master_seed"] = t.plan.master_seed;
    j["n_boot"] = t.plan.n_boot;
    j["config_hash"] = hash;
    std::vector<double> grid;
    for (const auto& e : t.entries) grid.push_back(e.axis_value);
    j["grid"] = grid;
    j["selected"] = t.selected;
    ordered_json entries = ordered_json::array();
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
        const auto& e = t.entries[i];
        ordered_json ej;
        ej["axis_value"] = e.axis_value;
        ej["chi2"] = e.chi2;
        ej["m_eff"] = e.m_eff;
        if (e.var_meff) ej["var_meff"] = *e.var_meff;
        ej["aic_p"] = e.aic_p;
        if (e.rms) ej["rms_truth"] = *e.rms;
        ej["viable"] = e.viable;
        ej["valid"] = e.valid;
        ej["selected"] = static_cast<int>(i) == t.selected;
        if (e.dchi2_dlog_alpha) ej["dchi2_dlog_alpha"] = *e.dchi2_dlog_alpha;
        if (e.dmeff_dlog_alpha) ej["dmeff_dlog_alpha"] = *e.dmeff_dlog_alpha;
        if (e.daicp_dlog_alpha) ej["daicp_dlog_alpha"] = *e.daicp_dlog_alpha;
        if (e.var_dmeff) ej["var_dmeff"] = *e.var_dmeff;
        entries.push_back(ej);
    }
    j["entries"] = entries;
    return j;
}

struct MockFlags {
    double snr = 10.0;
    std::size_t n_data = 71;
    double range_sigmas = 8.0;
    double gamma = 1.0, mu = 0.0, sigma = 350.0;
    int order = 10;
    std::vector<std::string> coeffs; // "i=value" overrides of the Table-1 defaults
};

aicp::GeneratingModel generating_from_flags(const MockFlags& f) {
    aicp::GeneratingModel g = aicp::toy_generating_model();
    g.gamma = f.gamma;
    g.mu = f.mu;
    g.sigma = f.sigma;
    g.n_gh_max = f.order;
    if (f.order != 10) g.h.clear(); // custom order starts from a clean coefficient set
    for (const auto& text : f.coeffs) {
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--coeff", "expected order=value");
        g.h[std::stoi(text.substr(0, eq))] = std::stod(text.substr(eq + 1));
    }
    std::erase_if(g.h, [&](const auto& kv) { return kv.first > g.n_gh_max; });
    return g;
}

void add_mock_flags(CLI::App* cmd, MockFlags& f) {
    cmd->add_option("--snr", f.snr, "signal-to-noise ratio at the profile peak");
    cmd->add_option("--ndata", f.n_data, "number of grid points");
    cmd->add_option("--range-sigmas", f.range_sigmas, "grid half width in units of sigma");
    cmd->add_option("--gamma", f.gamma, "profile amplitude");
    cmd->add_option("--mu", f.mu, "profile center");
    cmd->add_option("--sigma", f.sigma, "profile width");
    cmd->add_option("--order", f.order, "highest Hermite order of the generating model");
    cmd->add_option("--coeff", f.coeffs, "Hermite coefficient override, order=value");
}

int run(int argc, char** argv) {
    CLI::App app{"Generalized information-criterion model selection for penalized fits"};
    app.set_config("--config", "",
                   "configuration file: one [subcommand] section of key=value pairs "
                   "mirroring the flag names; command-line flags take precedence");
    app.require_subcommand(1);

    // ---- mockgen ----
    auto* mockgen = app.add_subcommand("mockgen", "generate a mock dataset and its truth");
    MockFlags mockgen_flags;
    std::uint64_t mockgen_seed = 0;
    std::string mockgen_out = "mock.csv", mockgen_truth = "mock_truth.csv";
    add_mock_flags(mockgen, mockgen_flags);
    mockgen->add_option("--seed", mockgen_seed, "RNG master seed")->required();
    mockgen->add_option("--out", mockgen_out, "dataset output path");
    mockgen->add_option("--truth-out", mockgen_truth, "truth output path");

    // ---- fit ----
    auto* fit_cmd = app.add_subcommand("fit", "fit a single model to a dataset");
    std::string fit_data, fit_model, fit_out;
    int fit_order = 10;
    double fit_alpha = 0.0;
    fit_cmd->add_option("--data", fit_data, "dataset CSV (x,y,eps)")->required();
    fit_cmd->add_option("--model", fit_model, "gh or nonparametric")
        ->required()
        ->check(CLI::IsMember({"gh", "nonparametric"}));
    fit_cmd->add_option("--order", fit_order, "Gauss-Hermite order (even, >= 2)");
    fit_cmd->add_option("--alpha", fit_alpha, "smoothing strength (nonparametric)");
    fit_cmd->add_option("--out", fit_out, "FitResult JSON path (default: stdout)");

    // ---- scan ----
    auto* scan_cmd = app.add_subcommand("scan", "scan a model family and select by AIC_p");
    std::string scan_data, scan_axis, scan_orders = "4:30:2", scan_grid = "1e7:1e13:25";
    std::string scan_out = "scan.csv", scan_truth, scan_dump;
    int scan_nboot = 500, scan_jobs = 1;
    std::uint64_t scan_seed = 0;
    scan_cmd->add_option("--data", scan_data, "dataset CSV")->required();
    scan_cmd->add_option("--axis", scan_axis, "scan axis: order or alpha")
        ->required()
        ->check(CLI::IsMember({"order", "alpha"}));
    scan_cmd->add_option("--orders", scan_orders, "order range lo:hi:step or list");
    scan_cmd->add_option("--alpha-grid", scan_grid, "alpha grid lo:hi:npoints (log) or list");
    scan_cmd->add_option("--nboot", scan_nboot, "bootstrap iterations per entry");
    scan_cmd->add_option("--seed", scan_seed, "RNG master seed")->required();
    scan_cmd->add_option("--truth", scan_truth, "truth CSV (x,y0) enabling rms columns");
    scan_cmd->add_option("--out", scan_out, "selection table CSV path");
    scan_cmd->add_option("--dump-boot", scan_dump, "directory for per-iteration audit dumps");
    scan_cmd->add_option("--jobs", scan_jobs, "max concurrent fits");

    // ---- oracle ----
    auto* oracle_cmd =
        app.add_subcommand("oracle", "validate the bootstrap against the linear-model oracle");
    std::string oracle_data, oracle_model = "nonparametric", oracle_grid = "1e8:1e12:10";
    std::string oracle_out = "oracle.csv";
    std::vector<double> oracle_extra_alphas;
    int oracle_nboot = 500, oracle_jobs = 1;
    std::uint64_t oracle_seed = 0;
    oracle_cmd->add_option("--data", oracle_data, "dataset CSV")->required();
    oracle_cmd->add_option("--model", oracle_model, "model family (linear families only)");
    oracle_cmd->add_option("--grid", oracle_grid, "alpha grid lo:hi:npoints (log) or list");
    oracle_cmd->add_option("--alpha", oracle_extra_alphas,
                           "extra alpha values prepended to the grid (0 allowed)");
    oracle_cmd->add_option("--nboot", oracle_nboot, "bootstrap iterations per grid point");
    oracle_cmd->add_option("--seed", oracle_seed, "RNG master seed")->required();
    oracle_cmd->add_option("--out", oracle_out, "oracle report CSV path");
    oracle_cmd->add_option("--jobs", oracle_jobs, "max concurrent fits");

    // ---- figures ----
    auto* fig_cmd = app.add_subcommand("figures", "run the figure reproduction suite");
    MockFlags fig_mock;
    std::string fig_outdir, fig_orders = "4:30:2", fig_grid = "1e7:1e13:25";
    std::string fig_ladder = "1,5,10,50,500,2500", fig_list = "3,4,5,6,7,8";
    int fig_nboot = 500, fig_nmocks = 5, fig_nmocks_avg = 20, fig_jobs = 1;
    std::uint64_t fig_seed = 0;
    add_mock_flags(fig_cmd, fig_mock);
    fig_cmd->add_option("--outdir", fig_outdir, "output directory")->required();
    fig_cmd->add_option("--seed", fig_seed, "RNG master seed")->required();
    fig_cmd->add_option("--orders", fig_orders, "order range lo:hi:step or list");
    fig_cmd->add_option("--alpha-grid", fig_grid, "alpha grid lo:hi:npoints (log) or list");
    fig_cmd->add_option("--nboot", fig_nboot, "bootstrap budget for the scan figures");
    fig_cmd->add_option("--nboot-ladder", fig_ladder, "comma list of budgets for fig6");
    fig_cmd->add_option("--n-mocks", fig_nmocks, "mock realizations for figs 4-7");
    fig_cmd->add_option("--n-mocks-avg", fig_nmocks_avg, "mock realizations for fig8");
    fig_cmd->add_option("--figs", fig_list, "comma list of figures to produce");
    fig_cmd->add_option("--jobs", fig_jobs, "max concurrent fits");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // help output
        std::cerr << ordered_json{{"error", e.what()}}.dump() << '\n';
        return 2;
    }

    if (mockgen->parsed()) {
        aicp::MockConfig cfg;
        cfg.generating = generating_from_flags(mockgen_flags);
        cfg.n_data = mockgen_flags.n_data;
        cfg.x_range_sigmas = mockgen_flags.range_sigmas;
        cfg.snr_peak = mockgen_flags.snr;
        cfg.seed = mockgen_seed;
        const aicp::MockData mock = aicp::generate_mock(cfg);
        aicp::save_dataset(mock.data, mockgen_out);
        aicp::save_truth(mock.data.x, mock.truth, mockgen_truth);
        write_sidecar_manifest(mockgen_out, "mockgen", config_hash(*mockgen), mockgen_seed,
                               {mockgen_out, mockgen_truth});
        std::cout << "wrote " << mockgen_out << " and " << mockgen_truth << " ("
                  << mock.data.size() << " rows)\n";
        return 0;
    }

    if (fit_cmd->parsed()) {
        const aicp::DataSet data = aicp::load_dataset(fit_data);
        aicp::ModelSpec spec;
        if (fit_model == "gh") {
            if (fit_order % 2 != 0)
                throw CLI::ValidationError("--order", "Gauss-Hermite orders increase in steps "
                                                      "of two; odd orders are not accepted");
            spec = aicp::ModelSpec::gauss_hermite(fit_order);
        } else {
            spec = aicp::ModelSpec::nonparametric(fit_alpha);
        }
        const aicp::FitResult result = aicp::fit(spec, data);
        ordered_json j;
        j["model"] = fit_model;
        if (fit_model == "gh")
            j["order"] = fit_order;
        else
            j["alpha"] = fit_alpha;
        j["config_hash"] = config_hash(*fit_cmd);
        j.update(fit_result_json(result));
        if (fit_out.empty())
            std::cout << j.dump(2) << '\n';
        else
            write_text(fit_out, j.dump(2) + "\n");
        return result.converged ? 0 : 1;
    }

    if (scan_cmd->parsed()) {
        if (scan_nboot < 1) throw CLI::ValidationError("--nboot", "must be >= 1");
        const aicp::DataSet data = aicp::load_dataset(scan_data);
        std::vector<double> truth;
        if (!scan_truth.empty()) {
            truth = aicp::load_truth(scan_truth);
            if (truth.size() != data.size())
                throw CLI::ValidationError("--truth", "truth length does not match the data");
        }
        const aicp::BootstrapPlan plan{scan_nboot, scan_seed};
        aicp::SelectionTable table;
        if (scan_axis == "order") {
            const auto orders = parse_order_range(scan_orders);
            for (const int o : orders)
                if (o % 2 != 0)
                    throw CLI::ValidationError("--orders", "orders must be even");
            table = aicp::scan_parametric(data, orders, plan,
                                          truth.empty() ? nullptr : &truth, scan_jobs);
        } else {
            table = aicp::scan_alpha(data, parse_alpha_grid(scan_grid), plan,
                                     truth.empty() ? nullptr : &truth, scan_jobs);
        }

        std::ofstream csv(scan_out);
        if (!csv) throw std::runtime_error("cannot open " + scan_out + " for writing");
        aicp::write_selection_csv(table, csv);
        csv.close();
        const std::string json_path =
            (std::filesystem::path(scan_out).replace_extension(".json")).string();
        write_text(json_path, selection_table_json(table, config_hash(*scan_cmd)).dump(2) + "\n");

        if (!scan_dump.empty()) {
            // per-entry audit dumps need the bootstrap rerun with identical streams
            std::filesystem::create_directories(scan_dump);
            for (const auto& e : table.entries) {
                const aicp::FitResult fy = aicp::fit(e.spec, data);
                const aicp::BootstrapSummary s =
                    aicp::run_bootstrap(e.spec, data, fy, plan, scan_jobs);
                std::ostringstream name;
                name << (table.axis == aicp::ScanAxis::Order ? "order_" : "alpha_")
                     << aicp::format_double(e.axis_value) << ".csv";
                std::ofstream dump(std::filesystem::path(scan_dump) / name.str());
                aicp::write_bootstrap_csv(s, dump);
            }
        }

        if (table.selected < 0) {
            std::cerr << ordered_json{{"error", "no valid scan entry"}}.dump() << '\n';
            return 1;
        }
        std::cout << "wrote " << scan_out << " and " << json_path << "; selected "
                  << (table.axis == aicp::ScanAxis::Order ? "order " : "alpha ")
                  << aicp::format_double(table.entries[static_cast<std::size_t>(table.selected)]
                                             .axis_value)
                  << '\n';
        return 0;
    }

    if (oracle_cmd->parsed()) {
        if (oracle_model != "nonparametric")
            throw CLI::ValidationError("--model", "oracle is linear-family only");
        if (oracle_nboot < 1) throw CLI::ValidationError("--nboot", "must be >= 1");
        const aicp::DataSet data = aicp::load_dataset(oracle_data);
        std::vector<double> grid = oracle_extra_alphas;
        for (const double a : parse_alpha_grid(oracle_grid)) grid.push_back(a);
        const aicp::BootstrapPlan plan{oracle_nboot, oracle_seed};
        const auto reports = aicp::validate_bootstrap(data, plan, grid, oracle_jobs);
        std::ofstream csv(oracle_out);
        if (!csv) throw std::runtime_error("cannot open " + oracle_out + " for writing");
        aicp::write_oracle_csv(reports, csv);
        csv.close();
        write_sidecar_manifest(oracle_out, "oracle", config_hash(*oracle_cmd), oracle_seed,
                               {oracle_out});
        std::cout << "wrote " << oracle_out << " (" << reports.size() << " grid points)\n";
        return 0;
    }

    if (fig_cmd->parsed()) {
        aicp::ExperimentConfig cfg;
        cfg.base_mock.generating = generating_from_flags(fig_mock);
        cfg.base_mock.n_data = fig_mock.n_data;
        cfg.base_mock.x_range_sigmas = fig_mock.range_sigmas;
        cfg.base_mock.snr_peak = fig_mock.snr;
        cfg.n_mocks = fig_nmocks;
        cfg.n_mocks_avg = fig_nmocks_avg;
        cfg.orders = parse_order_range(fig_orders);
        cfg.alpha_grid = parse_alpha_grid(fig_grid);
        cfg.n_boot_ladder = parse_int_list(fig_ladder);
        cfg.n_boot = fig_nboot;
        cfg.master_seed = fig_seed;
        cfg.output_dir = fig_outdir;
        cfg.figures.clear();
        for (const int f : parse_int_list(fig_list)) cfg.figures.insert(f);
        cfg.jobs = fig_jobs;
        aicp::run_figure_suite(cfg);
        write_sidecar_manifest(std::filesystem::path(fig_outdir) / "cli", "figures",
                               config_hash(*fig_cmd), fig_seed,
                               {(std::filesystem::path(fig_outdir) / "manifest.json").string()});
        std::cout << "wrote figure bundles under " << fig_outdir << '\n';
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0)
            std::cerr << nlohmann::ordered_json{{"error", e.what()}}.dump() << '\n';
        return e.get_exit_code() == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::ordered_json{{"error", e.what()}}.dump() << '\n';
        return 1;
    }
}
