#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sym_matrix.hpp"

namespace ggsel {

// Row-major rectangular data matrix (observations x variables).
struct DataMatrix {
    long rows = 0;
    int cols = 0;
    std::vector<double> values;

    DataMatrix() = default;
    DataMatrix(long r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(long r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    double at(long r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

// Comma-separated numeric matrix (RFC-4180 subset: no embedded commas or
// quotes, one record per line, optional header row, optional trailing CR).
inline DataMatrix parse_csv(std::istream& in, bool header) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool skipped_header = !header;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        std::vector<double> row;
        std::size_t start = 0, col = 0;
        while (start <= line.size()) {
            std::size_t end = line.find(',', start);
            if (end == std::string::npos) end = line.size();
            std::size_t a = start, b = end;
            while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
            while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t')) --b;
            ++col;
            if (a == b) throw ParseError(lineno, col, "empty field");
            double v;
            const auto res = std::from_chars(line.data() + a, line.data() + b, v);
            if (res.ec != std::errc{} || res.ptr != line.data() + b) throw NonNumeric(lineno, col);
            row.push_back(v);
            start = end + 1;
            if (end == line.size()) break;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError(lineno, row.size(), "ragged row");
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw TooFewRows();

    DataMatrix m(static_cast<long>(rows.size()), static_cast<int>(rows.front().size()));
    for (long r = 0; r < m.rows; ++r)
        for (int c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
    return m;
}

inline DataMatrix parse_csv_file(const std::string& path, bool header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    return parse_csv(in, header);
}

// s_tj = log(y_{t+1,j} / y_tj); drops the first row.
inline DataMatrix log_returns(const DataMatrix& prices) {
    if (prices.rows < 2) throw TooFewRows();
    DataMatrix out(prices.rows - 1, prices.cols);
    for (long t = 0; t + 1 < prices.rows; ++t) {
        for (int j = 0; j < prices.cols; ++j) {
            const double a = prices.at(t, j), b = prices.at(t + 1, j);
            if (!(a > 0.0) || !(b > 0.0))
                throw DataError("log-returns need positive prices (row " + std::to_string(t + 1) +
                                ", col " + std::to_string(j + 1) + ")");
            out.at(t, j) = std::log(b / a);
        }
    }
    return out;
}

// Center each column and scale to unit variance (1/n normalization, so the
// resulting sample covariance has a unit diagonal). A constant column is a
// hard error: dropping it silently would shift every vertex index after it.
inline DataMatrix standardize(const DataMatrix& x) {
    DataMatrix out(x.rows, x.cols);
    for (int j = 0; j < x.cols; ++j) {
        double mean = 0.0;
        for (long r = 0; r < x.rows; ++r) mean += x.at(r, j);
        mean /= x.rows;
        double var = 0.0;
        for (long r = 0; r < x.rows; ++r) {
            const double d = x.at(r, j) - mean;
            var += d * d;
        }
        var /= x.rows;
        if (var <= 1e-24) throw ZeroVarianceColumn(static_cast<std::size_t>(j) + 1);
        const double sd = std::sqrt(var);
        for (long r = 0; r < x.rows; ++r) out.at(r, j) = (x.at(r, j) - mean) / sd;
    }
    return out;
}

// sigma_hat = X^T X / n
inline SymMatrix sample_covariance(const DataMatrix& x) {
    SymMatrix s(x.cols);
    for (int i = 0; i < x.cols; ++i) {
        for (int j = i; j < x.cols; ++j) {
            double acc = 0.0;
            for (long r = 0; r < x.rows; ++r) acc += x.at(r, i) * x.at(r, j);
            s.set(i, j, acc / x.rows);
        }
    }
    return s;
}

struct IngestResult {
    DataMatrix data;
    SymMatrix sigma_hat;
};

inline IngestResult ingest(const std::string& path, bool use_log_returns, bool use_standardize,
                           bool header = false) {
    DataMatrix m = parse_csv_file(path, header);
    if (use_log_returns) m = log_returns(m);
    if (use_standardize) m = standardize(m);
    SymMatrix cov = sample_covariance(m);
    return IngestResult{std::move(m), std::move(cov)};
}

}  // namespace ggsel
