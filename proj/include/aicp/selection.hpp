#pragma once

// Model scans and selection by the generalized information criterion
//
//   AIC_p = chi2 + 2 m_eff,
//
// minimized over a discrete family (Gauss-Hermite order) or a smoothing
// grid (alpha). Scans are exhaustive; the selected entry is the global grid
// argmin among valid entries, ties going to the smaller m_eff. Entries whose
// chi2 + m_eff lies within 3 sqrt(2 N) of N are flagged statistically viable.

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aicp/bootstrap.hpp"
#include "aicp/dataset.hpp"
#include "aicp/model.hpp"
#include "aicp/solver.hpp"

namespace aicp {

inline double aic_p(double chi2, double m_eff) {
    if (chi2 < 0.0) throw std::invalid_argument("chi2 must be >= 0");
    return chi2 + 2.0 * m_eff;
}

inline double rms_truth(const Vector& fitted, const std::vector<double>& truth) {
    if (fitted.size() != static_cast<Eigen::Index>(truth.size()))
        throw std::invalid_argument("fitted and truth lengths differ");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < fitted.size(); ++i) {
        const double d = fitted[i] - truth[static_cast<std::size_t>(i)];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(fitted.size()));
}

inline bool statistically_viable(double chi2, double m_eff, std::size_t n_data) {
    const double n = static_cast<double>(n_data);
    const double band = 3.0 * std::sqrt(2.0 * n);
    const double s = chi2 + m_eff;
    return s >= n - band && s <= n + band;
}

enum class ScanAxis { Order, Alpha };

struct SelectionEntry {
    ModelSpec spec;
    double axis_value = 0.0; // n_GH or alpha
    double chi2 = 0.0;
    double m_eff = 0.0;
    std::optional<double> var_meff; // absent when N_boot = 1
    double aic_p = 0.0;
    std::optional<double> rms; // vs truth, when truth is available
    bool viable = false;
    bool valid = false;
    // forward differences to the next grid point (alpha scans only)
    std::optional<double> dchi2_dlog_alpha, dmeff_dlog_alpha, daicp_dlog_alpha, var_dmeff;
};

struct SelectionTable {
    ScanAxis axis = ScanAxis::Alpha;
    std::vector<SelectionEntry> entries;
    int selected = -1; // index of the minimum AIC_p among valid entries
    std::size_t n_data = 0;
    BootstrapPlan plan;
};

inline int select_minimum(const std::vector<SelectionEntry>& entries) {
    int best = -1;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (!e.valid) continue;
        if (best < 0 || e.aic_p < entries[static_cast<std::size_t>(best)].aic_p ||
            (e.aic_p == entries[static_cast<std::size_t>(best)].aic_p &&
             e.m_eff < entries[static_cast<std::size_t>(best)].m_eff))
            best = static_cast<int>(i);
    }
    return best;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("bad log grid");
    std::vector<double> g(static_cast<std::size_t>(n));
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < n; ++i)
        g[static_cast<std::size_t>(i)] =
            std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) / (n - 1));
    return g;
}

// Default smoothing grid; brackets the toy problem's useful range with margin.
inline std::vector<double> default_alpha_grid() { return log_grid(1e7, 1e13, 25); }

namespace detail {

inline SelectionEntry make_entry(const ModelSpec& spec, double axis_value, const FitResult& fit,
                                 const BootstrapSummary& summary, std::size_t n_data,
                                 const std::vector<double>* truth) {
    SelectionEntry e;
    e.spec = spec;
    e.axis_value = axis_value;
    e.chi2 = fit.chi2;
    e.m_eff = summary.m_eff;
    if (summary.var_direct) e.var_meff = *summary.var_direct;
    e.valid = fit.converged && summary.valid;
    if (e.valid) {
        e.aic_p = aic_p(e.chi2, e.m_eff);
        e.viable = statistically_viable(e.chi2, e.m_eff, n_data);
        if (truth) e.rms = rms_truth(fit.fitted, *truth);
    }
    return e;
}

} // namespace detail

inline SelectionTable scan_parametric(const DataSet& data, const std::vector<int>& orders,
                                      const BootstrapPlan& plan,
                                      const std::vector<double>* truth = nullptr, int jobs = 1) {
    validate(data);
    validate(plan);
    if (orders.empty()) throw std::invalid_argument("order list is empty");
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (orders[i] < 2 || orders[i] % 2 != 0)
            throw std::invalid_argument("orders must be even and >= 2");
        if (i > 0 && orders[i] <= orders[i - 1])
            throw std::invalid_argument("orders must increase");
    }

    SelectionTable table;
    table.axis = ScanAxis::Order;
    table.n_data = data.size();
    table.plan = plan;
    for (const int order : orders) {
        const ModelSpec spec = ModelSpec::gauss_hermite(order);
        const FitResult fit_y = fit(spec, data);
        BootstrapSummary summary;
        if (fit_y.converged) summary = run_bootstrap(spec, data, fit_y, plan, jobs);
        table.entries.push_back(
            detail::make_entry(spec, order, fit_y, summary, data.size(), truth));
    }
    table.selected = select_minimum(table.entries);
    return table;
}

inline SelectionTable scan_alpha(const DataSet& data, const std::vector<double>& grid,
                                 const BootstrapPlan& plan,
                                 const std::vector<double>* truth = nullptr, int jobs = 1) {
    validate(data);
    validate(plan);
    if (grid.empty()) throw std::invalid_argument("alpha grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("alpha grid must be positive");
        if (i > 0 && grid[i] <= grid[i - 1])
            throw std::invalid_argument("alpha grid must increase");
    }

    SelectionTable table;
    table.axis = ScanAxis::Alpha;
    table.n_data = data.size();
    table.plan = plan;

    std::vector<FitResult> fits;
    std::vector<BootstrapSummary> summaries;
    fits.reserve(grid.size());
    summaries.reserve(grid.size());
    for (const double alpha : grid) {
        const ModelSpec spec = ModelSpec::nonparametric(alpha);
        fits.push_back(fit(spec, data));
        summaries.push_back(run_bootstrap(spec, data, fits.back(), plan, jobs));
        table.entries.push_back(detail::make_entry(spec, alpha, fits.back(), summaries.back(),
                                                   data.size(), truth));
    }

    // forward differences per consecutive pair under common random numbers
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        auto& e = table.entries[k];
        if (!e.valid || !table.entries[k + 1].valid) continue;
        const double dlog = std::log10(grid[k + 1]) - std::log10(grid[k]);
        const DifferenceScatter ds = derivative_scatter(summaries[k], summaries[k + 1]);
        e.dchi2_dlog_alpha = (fits[k + 1].chi2 - fits[k].chi2) / dlog;
        e.dmeff_dlog_alpha = ds.dm_eff / dlog;
        e.daicp_dlog_alpha = *e.dchi2_dlog_alpha + 2.0 * *e.dmeff_dlog_alpha;
        if (ds.var_dm) e.var_dmeff = *ds.var_dm / (dlog * dlog);
    }

    table.selected = select_minimum(table.entries);
    return table;
}

namespace detail {

inline std::string csv_opt(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
}

} // namespace detail

// One row per entry: axis_value,chi2,m_eff,var_meff,aic_p,rms_truth,viable,selected
// Alpha scans append the forward-difference columns.
inline void write_selection_csv(const SelectionTable& table, std::ostream& out) {
    out << "axis_value,chi2,m_eff,var_meff,aic_p,rms_truth,viable,selected";
    const bool alpha_axis = table.axis == ScanAxis::Alpha;
    if (alpha_axis) out << ",dchi2_dlog_alpha,dmeff_dlog_alpha,daicp_dlog_alpha,var_dmeff";
    out << '\n';
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
        const auto& e = table.entries[i];
        out << format_double(e.axis_value) << ',' << format_double(e.chi2) << ','
            << format_double(e.m_eff) << ',' << detail::csv_opt(e.var_meff) << ','
            << format_double(e.aic_p) << ',' << detail::csv_opt(e.rms) << ','
            << (e.viable ? 1 : 0) << ',' << (static_cast<int>(i) == table.selected ? 1 : 0);
        if (alpha_axis)
            out << ',' << detail::csv_opt(e.dchi2_dlog_alpha) << ','
                << detail::csv_opt(e.dmeff_dlog_alpha) << ','
                << detail::csv_opt(e.daicp_dlog_alpha) << ',' << detail::csv_opt(e.var_dmeff);
        out << '\n';
    }
}

} // namespace aicp
