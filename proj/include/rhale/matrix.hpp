#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rhale/error.hpp"

namespace rhale {

struct Range {
    double min = 0.0;
    double max = 0.0;
    double width() const { return max - min; }
};

// Row-major N x D table of finite reals. Used for datasets and for the
// companion gradient tables that share their shape.
class FeatureMatrix {
public:
    FeatureMatrix() = default;

    FeatureMatrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                  std::vector<std::string> names = {})
        : rows_(rows), cols_(cols), values_(std::move(values)), names_(std::move(names)) {
        if (rows_ < 2) throw InputError("dataset needs at least 2 rows, got " + std::to_string(rows_));
        if (cols_ < 1) throw InputError("dataset needs at least 1 column");
        if (values_.size() != rows_ * cols_)
            throw InputError("dataset storage has " + std::to_string(values_.size()) +
                             " values, expected " + std::to_string(rows_ * cols_));
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                throw InputError("non-finite value at row " + std::to_string(i / cols_) +
                                 ", column " + std::to_string(i % cols_));
        }
        if (names_.empty()) {
            for (std::size_t c = 0; c < cols_; ++c) names_.push_back("x" + std::to_string(c + 1));
        } else if (names_.size() != cols_) {
            throw InputError("got " + std::to_string(names_.size()) + " column names for " +
                             std::to_string(cols_) + " columns");
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<double>& values() const { return values_; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols_, cols_};
    }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    std::vector<double> column(std::size_t j) const {
        check_feature(j);
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    void check_feature(std::size_t j) const {
        if (j >= cols_)
            throw InputError("feature index " + std::to_string(j) + " out of range [0, " +
                             std::to_string(cols_) + ")");
    }

    // Range of a feature that is about to be explained; constant features are rejected.
    Range feature_range(std::size_t j) const {
        check_feature(j);
        auto col = column(j);
        auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        if (!(*lo < *hi)) throw InputError("feature " + names_[j] + " is constant");
        return {*lo, *hi};
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
    std::vector<std::string> names_;
};

// Shortest round-trippable text for a double; '.' separator regardless of locale.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

inline double parse_cell(const std::string& s, std::size_t row, std::size_t col) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size())
        throw InputError("cannot parse '" + s + "' at data row " + std::to_string(row) +
                         ", column " + std::to_string(col));
    return v;
}

}  // namespace detail

inline FeatureMatrix read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw InputError("empty CSV input");
    auto names = detail::split_csv_line(line);
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != names.size())
            throw InputError("data row " + std::to_string(rows) + " has " +
                             std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(names.size()));
        for (std::size_t c = 0; c < cells.size(); ++c)
            values.push_back(detail::parse_cell(cells[c], rows, c));
        ++rows;
    }
    const std::size_t cols = names.size();
    return FeatureMatrix(rows, cols, std::move(values), std::move(names));
}

inline FeatureMatrix read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return read_csv(in);
}

inline void write_csv(std::ostream& out, const FeatureMatrix& m) {
    const auto& names = m.names();
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << '\n';
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_double(m(i, c));
        out << '\n';
    }
}

}  // namespace rhale
