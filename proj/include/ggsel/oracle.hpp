#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "glasso.hpp"
#include "graph.hpp"
#include "rng.hpp"
#include "score.hpp"
#include "sym_matrix.hpp"

namespace ggsel {

struct IntegralEstimate {
    double log_value = 0.0;
    double mc_standard_error = 0.0;
    long draws = 0;
    long rejected = 0;  // proposals outside the positive definite cone
};

namespace detail {

struct McBatchSums {
    double log_s1 = -std::numeric_limits<double>::infinity();  // log sum of weights
    double log_s2 = -std::numeric_limits<double>::infinity();  // log sum of squared weights
    long rejected = 0;
};

inline double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace detail

// Monte-Carlo estimate of log integral over the free entries of
// exp(-n h(O)/2) restricted to the positive definite cone, by importance
// sampling from a Gaussian centered at the glasso mode. The proposal
// covariance is twice the curvature-matched (2/n) H^-1 for tail safety.
// Draws are processed in fixed-size batches with per-batch derived RNG
// streams and merged in batch order, so the result depends only on the seed,
// never on the thread count. A test instrument, guarded to p <= 4.
inline IntegralEstimate mc_marginal(const GraphStructure& g, const SymMatrix& sigma_hat, int n,
                                    double lambda, long draws, std::uint64_t seed, int threads = 1) {
    const int p = g.p();
    if (p > 4) throw GuardViolated("mc_marginal: p must be <= 4");
    if (draws < 10000) throw GuardViolated("mc_marginal: need at least 1e4 draws");

    const double rho = lambda / n;
    const GlassoSolution sol = solve(GlassoProblem{sigma_hat, rho, g});
    if (!sol.converged) throw SolverDiverged("mc_marginal: glasso did not converge");

    const FreeIndexSet idx(g);
    const int d = idx.size();
    const HessianMatrix hess = hessian_at(sol.omega_star, idx);
    CholeskyFactor hess_chol = [&] {
        try {
            return cholesky(hess.entries);
        } catch (const NotPositiveDefinite&) {
            throw DegenerateProposal("mc_marginal: Hessian at the mode is not positive definite");
        }
    }();

    const double cov_scale = 4.0 / n;  // 2 x Laplace covariance (2/n) H^-1
    const double log_det_cov = d * std::log(cov_scale) - log_det(hess_chol);
    const double log_norm_q = -0.5 * d * std::log(2.0 * 3.14159265358979323846) - 0.5 * log_det_cov;
    const double sqrt_scale = std::sqrt(cov_scale);

    const std::vector<double> mu = pack_free(sol.omega_star, idx);
    const std::vector<Edge>& pairs = idx.pairs();

    const long batch_size = 65536;
    const long n_batches = (draws + batch_size - 1) / batch_size;

    auto run_batch = [&](long b) {
        Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(b)));
        const long lo = b * batch_size;
        const long hi = std::min(draws, lo + batch_size);
        detail::McBatchSums sums;
        std::vector<double> z(d), x(d);
        SymMatrix omega(p);
        for (long k = lo; k < hi; ++k) {
            for (int t = 0; t < d; ++t) z[t] = rng.normal();
            const double z_sq = [&] {
                double s = 0.0;
                for (double v : z) s += v * v;
                return s;
            }();
            // x = mu + sqrt_scale * L^-T z has covariance cov_scale * H^-1
            x = z;
            hess_chol.backward_solve(x.data());
            for (int t = 0; t < d; ++t) x[t] = mu[t] + sqrt_scale * x[t];

            for (int t = 0; t < d; ++t) omega.set(pairs[t].first, pairs[t].second, x[t]);
            double log_det_omega;
            try {
                log_det_omega = log_det(cholesky(omega));
            } catch (const NotPositiveDefinite&) {
                ++sums.rejected;
                continue;
            }
            double pen = 0.0;
            for (int t = 0; t < p; ++t) pen += x[t];
            for (int t = p; t < d; ++t) pen += 2.0 * std::fabs(x[t]);
            const double h = -log_det_omega + trace_product(sigma_hat, omega) + rho * pen;
            const double log_f = -0.5 * n * h;
            const double log_q = log_norm_q - 0.5 * z_sq;
            const double lw = log_f - log_q;
            sums.log_s1 = detail::log_add(sums.log_s1, lw);
            sums.log_s2 = detail::log_add(sums.log_s2, 2.0 * lw);
        }
        return sums;
    };

    std::vector<detail::McBatchSums> parts(n_batches);
    if (threads <= 1) {
        for (long b = 0; b < n_batches; ++b) parts[b] = run_batch(b);
    } else {
        std::vector<std::future<detail::McBatchSums>> futs;
        for (long b = 0; b < n_batches; ++b)
            futs.push_back(std::async(std::launch::async, run_batch, b));
        for (long b = 0; b < n_batches; ++b) parts[b] = futs[b].get();
    }

    detail::McBatchSums all;
    for (const auto& s : parts) {
        all.log_s1 = detail::log_add(all.log_s1, s.log_s1);
        all.log_s2 = detail::log_add(all.log_s2, s.log_s2);
        all.rejected += s.rejected;
    }

    IntegralEstimate est;
    est.draws = draws;
    est.rejected = all.rejected;
    est.log_value = all.log_s1 - std::log(static_cast<double>(draws));
    // delta-method standard error of the log estimate
    const double ratio = std::exp(all.log_s2 + std::log(static_cast<double>(draws)) - 2.0 * all.log_s1);
    est.mc_standard_error = std::sqrt(std::max(ratio - 1.0, 0.0) / draws);
    return est;
}

// Central finite differences of -log det along the free-entry directions;
// the trace term is linear and contributes nothing. Validation target for
// hessian_at.
inline HessianMatrix fd_hessian(const SymMatrix& omega, const FreeIndexSet& idx, double step) {
    const int d = idx.size();
    const auto f = [&](const SymMatrix& m) { return -log_det(cholesky(m)); };

    const auto shifted = [&](int a, double sa, int b, double sb) {
        SymMatrix m = omega;
        m.add(idx[a].first, idx[a].second, sa);
        if (b >= 0) m.add(idx[b].first, idx[b].second, sb);
        return f(m);
    };

    SymMatrix h(d);
    const double f0 = f(omega);
    for (int a = 0; a < d; ++a) {
        h.set(a, a, (shifted(a, step, -1, 0.0) - 2.0 * f0 + shifted(a, -step, -1, 0.0)) / (step * step));
        for (int b = a + 1; b < d; ++b) {
            const double v = (shifted(a, step, b, step) - shifted(a, step, b, -step) -
                              shifted(a, -step, b, step) + shifted(a, -step, b, -step)) /
                             (4.0 * step * step);
            h.set(a, b, v);
        }
    }
    return HessianMatrix{idx, std::move(h)};
}

// Squared Hellinger distance between the zero-mean Gaussians with precision
// matrices omega1, omega2, from the eigenvalues d_i of the whitened ratio:
//   h^2 = 2 [ 1 - prod d_i^(-1/4) / sqrt(prod (1 + d_i^(-1))/2) ].
inline double hellinger_sq(const SymMatrix& omega1, const SymMatrix& omega2) {
    const int p = omega1.dim();
    if (omega2.dim() != p) throw Error("hellinger_sq: dimension mismatch");
    const CholeskyFactor l1 = cholesky(omega1);
    cholesky(omega2);  // positive definiteness check

    // M = L1^-1 omega2 L1^-T, same spectrum as omega1^(-1/2) omega2 omega1^(-1/2)
    std::vector<double> y(static_cast<std::size_t>(p) * p), col(p);
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < p; ++i) col[i] = omega2(i, j);
        l1.forward_solve(col.data());
        for (int i = 0; i < p; ++i) y[static_cast<std::size_t>(i) * p + j] = col[i];
    }
    std::vector<double> mg(static_cast<std::size_t>(p) * p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) col[j] = y[static_cast<std::size_t>(i) * p + j];
        l1.forward_solve(col.data());
        for (int j = 0; j < p; ++j) mg[static_cast<std::size_t>(i) * p + j] = col[j];
    }
    SymMatrix m(p);
    for (int i = 0; i < p; ++i)
        for (int j = i; j < p; ++j)
            m.set(i, j, 0.5 * (mg[static_cast<std::size_t>(i) * p + j] +
                               mg[static_cast<std::size_t>(j) * p + i]));

    double log_ratio = 0.0;
    for (double di : jacobi_eigenvalues(m)) {
        if (di <= 0.0) throw NotPositiveDefinite(0);
        log_ratio += -0.25 * std::log(di) - 0.5 * std::log(0.5 * (1.0 + 1.0 / di));
    }
    return 2.0 * (1.0 - std::exp(log_ratio));
}

// Remainder of the second-order expansion of the smooth part
// f(O) = -log det(O) + tr(sigma_hat O) around omega0, along the free entries.
inline double taylor_remainder(const SymMatrix& omega0, const SymMatrix& sigma_hat,
                               const FreeIndexSet& idx, const std::vector<double>& delta_vec) {
    const int d = idx.size();
    const SymMatrix w = inverse(cholesky(omega0));
    SymMatrix omega1 = omega0;
    for (int k = 0; k < d; ++k) omega1.add(idx[k].first, idx[k].second, delta_vec[k]);

    const double f0 = -log_det(cholesky(omega0)) + trace_product(sigma_hat, omega0);
    const double f1 = -log_det(cholesky(omega1)) + trace_product(sigma_hat, omega1);

    double linear = 0.0;
    for (int k = 0; k < d; ++k) {
        const auto [i, j] = idx[k];
        const double gr = (i == j) ? (sigma_hat(i, i) - w(i, i)) : 2.0 * (sigma_hat(i, j) - w(i, j));
        linear += gr * delta_vec[k];
    }

    const HessianMatrix hess = hessian_at(omega0, idx);
    double quad = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) quad += delta_vec[a] * hess.entries(a, b) * delta_vec[b];

    return f1 - f0 - linear - 0.5 * quad;
}

}  // namespace ggsel
