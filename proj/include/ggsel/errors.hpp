#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ggsel {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cholesky pivot failure; `pivot_index` is the 0-based row where factorization broke down.
struct NotPositiveDefinite : Error {
    int pivot_index;
    explicit NotPositiveDefinite(int index)
        : Error("NotPositiveDefinite: pivot " + std::to_string(index) + " not positive"),
          pivot_index(index) {}
};

struct InvalidPenalty : Error {
    using Error::Error;
};

struct TooLarge : Error {
    using Error::Error;
};

struct GuardViolated : Error {
    using Error::Error;
};

struct DegenerateProposal : Error {
    using Error::Error;
};

struct SolverDiverged : Error {
    using Error::Error;
};

struct EmptyModelSet : Error {
    using Error::Error;
};

// Data ingestion errors. Rows/columns are 1-based in messages.
struct ParseError : Error {
    std::size_t row, col;
    ParseError(std::size_t r, std::size_t c, const std::string& what)
        : Error("ParseError at row " + std::to_string(r) + ", col " + std::to_string(c) + ": " + what),
          row(r), col(c) {}
};

struct NonNumeric : Error {
    std::size_t row, col;
    NonNumeric(std::size_t r, std::size_t c)
        : Error("NonNumeric value at row " + std::to_string(r) + ", col " + std::to_string(c)),
          row(r), col(c) {}
};

struct TooFewRows : Error {
    TooFewRows() : Error("TooFewRows: need at least 2 data rows") {}
};

struct ZeroVarianceColumn : Error {
    std::size_t col;
    explicit ZeroVarianceColumn(std::size_t c)
        : Error("ZeroVarianceColumn: column " + std::to_string(c) + " has zero variance"), col(c) {}
};

struct ConfigError : Error {
    using Error::Error;
};

// Bad input data that is not a structural parse failure (unreadable file,
// non-positive prices for log-returns, ...).
struct DataError : Error {
    using Error::Error;
};

}  // namespace ggsel
