#pragma once

// Text formats used by the CLI.
//
// Dataset file:  header "x,y,eps", then one CSV row per point.
// Truth file:    header "x,y0", same layout.
// Doubles are written with 17 significant digits, so save/load round trips
// are lossless.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "aicp/dataset.hpp"

namespace aicp {

class ParseError : public std::runtime_error {
  public:
    ParseError(std::string message, std::size_t row)
        : std::runtime_error(std::move(message)), row_(row) {}
    std::size_t row() const noexcept { return row_; } // 1-based data row, 0 for header
  private:
    std::size_t row_;
};

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

inline double parse_number(const std::string& text, std::size_t row) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && *end == ' ') ++end;
    if (end == begin || (end && *end != '\0'))
        throw ParseError("malformed number '" + text + "' at row " + std::to_string(row), row);
    return v;
}

} // namespace detail

inline void save_dataset(const DataSet& ds, const std::filesystem::path& path) {
    validate(ds);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "x,y,eps\n";
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << format_double(ds.x[i]) << ',' << format_double(ds.y[i]) << ','
            << format_double(ds.eps[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline DataSet load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file", 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,y,eps") throw ParseError("expected header 'x,y,eps'", 0);

    DataSet ds;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 3)
            throw ParseError("expected 3 fields at row " + std::to_string(row), row);
        const double x = detail::parse_number(fields[0], row);
        const double y = detail::parse_number(fields[1], row);
        const double eps = detail::parse_number(fields[2], row);
        if (!(eps > 0.0))
            throw ParseError("non-positive noise at row " + std::to_string(row), row);
        if (!ds.x.empty() && !(x > ds.x.back()))
            throw ParseError("x not strictly increasing at row " + std::to_string(row), row);
        ds.x.push_back(x);
        ds.y.push_back(y);
        ds.eps.push_back(eps);
    }
    if (ds.size() < 3) throw ParseError("need at least 3 points", row);
    validate(ds);
    return ds;
}

inline void save_truth(const std::vector<double>& x, const std::vector<double>& y0,
                       const std::filesystem::path& path) {
    if (x.size() != y0.size()) throw std::invalid_argument("truth arrays must match");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << "x,y0\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        out << format_double(x[i]) << ',' << format_double(y0[i]) << '\n';
}

inline std::vector<double> load_truth(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty file", 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x,y0") throw ParseError("expected header 'x,y0'", 0);
    std::vector<double> y0;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 2)
            throw ParseError("expected 2 fields at row " + std::to_string(row), row);
        y0.push_back(detail::parse_number(fields[1], row));
    }
    return y0;
}

} // namespace aicp
