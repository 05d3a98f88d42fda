#pragma once

#include <cstdint>
#include <vector>

#include "ggsel/data.hpp"
#include "ggsel/rng.hpp"
#include "ggsel/simulate.hpp"
#include "ggsel/sym_matrix.hpp"

namespace test_helpers {

inline ggsel::SymMatrix ar1_sigma(int p) {
    ggsel::SymMatrix s(p);
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) s.set(i, j, std::pow(0.7, j - i));
    return s;
}

inline ggsel::SymMatrix random_symmetric(int p, ggsel::Rng& rng, double scale = 1.0) {
    ggsel::SymMatrix m(p);
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j) m.set(i, j, scale * rng.normal());
    return m;
}

// B B^T / p + ridge: positive definite with spread eigenvalues.
inline ggsel::SymMatrix random_pd(int p, ggsel::Rng& rng, double ridge = 0.5) {
    std::vector<double> b(static_cast<std::size_t>(p) * p);
    for (auto& v : b) v = rng.normal();
    ggsel::SymMatrix m(p);
    for (int i = 0; i < p; ++i) {
        for (int j = i; j < p; ++j) {
            double s = 0.0;
            for (int k = 0; k < p; ++k)
                s += b[static_cast<std::size_t>(i) * p + k] * b[static_cast<std::size_t>(j) * p + k];
            m.set(i, j, s / p + (i == j ? ridge : 0.0));
        }
    }
    return m;
}

// Sample covariance of AR(1) data, the shared fixture.
inline ggsel::SymMatrix ar1_data_cov(int p, long n, std::uint64_t seed) {
    const auto truth = ggsel::truth_matrices({ggsel::TruthFamily::AR1, p});
    const auto x = ggsel::sample(truth.omega, n, seed);
    return ggsel::sample_covariance(x);
}

}  // namespace test_helpers
