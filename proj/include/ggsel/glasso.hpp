#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "sym_matrix.hpp"

namespace ggsel {

// Penalized precision estimation problem:
//   minimize  -log det(O) + tr(sigma_hat O) + rho (sum_i o_ii + 2 sum_{i<j free} |o_ij|)
// over positive definite O with entries outside the support fixed at zero.
// An absent support leaves every off-diagonal free.
struct GlassoProblem {
    SymMatrix sigma_hat;
    double rho = 0.0;
    std::optional<GraphStructure> support;
};

struct GlassoConfig {
    double tol = 1e-7;   // KKT residual target
    int max_iter = 500;  // coordinate sweeps
};

struct GlassoSolution {
    SymMatrix omega_star;
    double objective = 0.0;
    double kkt_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;  // objective after each sweep
};

namespace detail {

inline std::vector<Edge> free_offdiagonals(const GlassoProblem& prob) {
    const int p = prob.sigma_hat.dim();
    if (prob.support) {
        if (prob.support->p() != p) throw Error("glasso: support dimension mismatch");
        return prob.support->edges();
    }
    std::vector<Edge> e;
    e.reserve(max_pair_count(p));
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) e.emplace_back(i, j);
    return e;
}

inline double glasso_objective(const SymMatrix& omega, const SymMatrix& sigma_hat, double rho,
                               const std::vector<Edge>& free_edges, double log_det_omega) {
    double pen = 0.0;
    for (int i = 0; i < omega.dim(); ++i) pen += omega(i, i);
    for (auto [i, j] : free_edges) pen += 2.0 * std::fabs(omega(i, j));
    return -log_det_omega + trace_product(sigma_hat, omega) + rho * pen;
}

// Exact minimizer of the one-dimensional restriction
//   t -> -log[(1 + t W_ij)^2 - t^2 W_ii W_jj] + 2 sigma_ij t + 2 rho |omega_ij + t|
// where W is the current inverse. The log barrier keeps the step strictly
// inside the positive definite interval, so no backtracking is needed.
inline double offdiag_step(double w_ii, double w_jj, double w_ij, double sigma_ij, double rho,
                           double omega_ij) {
    const double a = w_ij * w_ij - w_ii * w_jj;  // < 0 for a PD inverse
    const double b = w_ij;
    const double sq = std::sqrt(b * b - a);
    double lo = (-b + sq) / a;
    double hi = (-b - sq) / a;
    if (lo > hi) std::swap(lo, hi);

    const auto dvalue = [&](double t) { return 1.0 + 2.0 * b * t + a * t * t; };
    const auto smooth_grad = [&](double t) { return sigma_ij - (b + a * t) / dvalue(t); };

    const double kink = -omega_ij;
    int sign = 0;  // sign of omega_ij + t on the bracket holding the minimizer
    double blo = lo, bhi = hi;
    if (kink > lo && kink < hi) {
        const double g0 = smooth_grad(kink);
        if (std::fabs(g0) <= rho) return kink;
        if (g0 > rho) {
            sign = -1;
            bhi = kink;
        } else {
            sign = +1;
            blo = kink;
        }
    } else {
        sign = (kink <= lo) ? +1 : -1;
    }

    // stationarity: c a t^2 + (2 c b - a) t + (c - b) = 0 with c = sigma_ij + rho sign
    const double c = sigma_ij + rho * sign;
    double root = std::numeric_limits<double>::quiet_NaN();
    const double qa = c * a, qb = 2.0 * c * b - a, qc = c - b;
    if (std::fabs(qa) < 1e-300) {
        if (qb != 0.0) root = -qc / qb;
    } else {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double q = -0.5 * (qb + (qb >= 0.0 ? 1.0 : -1.0) * std::sqrt(disc));
            const double r1 = q / qa;
            const double r2 = (q != 0.0) ? qc / q : std::numeric_limits<double>::quiet_NaN();
            const auto inside = [&](double r) { return std::isfinite(r) && r > blo && r < bhi; };
            if (inside(r1))
                root = r1;
            else if (inside(r2))
                root = r2;
        }
    }
    if (std::isfinite(root) && root > blo && root < bhi) return root;

    // Bisection fallback on the (increasing) directional derivative.
    const double span = bhi - blo;
    double a0 = blo + 1e-12 * span, b0 = bhi - 1e-12 * span;
    auto deriv = [&](double t) { return smooth_grad(t) + rho * sign; };
    double fa = deriv(a0), fb = deriv(b0);
    if (fa >= 0.0) return a0;
    if (fb <= 0.0) return b0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (a0 + b0);
        if (deriv(mid) < 0.0)
            a0 = mid;
        else
            b0 = mid;
    }
    return 0.5 * (a0 + b0);
}

inline void rank_one_inverse_update(SymMatrix& w, int i, double t) {
    const int p = w.dim();
    const double denom = 1.0 + t * w(i, i);
    const double scale = t / denom;
    std::vector<double> wi(p);
    for (int k = 0; k < p; ++k) wi[k] = w(k, i);
    double* wd = w.data();
    for (int k = 0; k < p; ++k) {
        const double s = scale * wi[k];
        for (int l = 0; l < p; ++l) wd[static_cast<std::size_t>(k) * p + l] -= s * wi[l];
    }
}

// Woodbury update of W after omega_ij and omega_ji both change by t.
inline void rank_two_inverse_update(SymMatrix& w, int i, int j, double t) {
    const int p = w.dim();
    const double w_ii = w(i, i), w_jj = w(j, j), w_ij = w(i, j);
    const double u = 1.0 / t;
    const double det_m = w_ii * w_jj - (w_ij + u) * (w_ij + u);
    const double m11 = w_jj / det_m;
    const double m12 = -(w_ij + u) / det_m;
    const double m22 = w_ii / det_m;
    std::vector<double> wi(p), wj(p);
    for (int k = 0; k < p; ++k) {
        wi[k] = w(k, i);
        wj[k] = w(k, j);
    }
    double* wd = w.data();
    for (int k = 0; k < p; ++k) {
        const double ci = m11 * wi[k] + m12 * wj[k];
        const double cj = m12 * wi[k] + m22 * wj[k];
        for (int l = 0; l < p; ++l) wd[static_cast<std::size_t>(k) * p + l] -= ci * wi[l] + cj * wj[l];
    }
}

}  // namespace detail

// Stationarity violation of a candidate solution. Maximum over free entries of
//   |(O^-1 - sigma)_ij - rho sign(o_ij)|      when o_ij != 0,
//   max(0, |(O^-1 - sigma)_ij| - rho)         when o_ij == 0,
//   |(O^-1 - sigma)_ii - rho|                 on the diagonal.
// Entries constrained to zero by the support are excluded.
inline double kkt_residual(const SymMatrix& solution, const GlassoProblem& problem) {
    const SymMatrix w = inverse(cholesky(solution));
    const auto free_edges = detail::free_offdiagonals(problem);
    double r = 0.0;
    for (int i = 0; i < solution.dim(); ++i)
        r = std::max(r, std::fabs(w(i, i) - problem.sigma_hat(i, i) - problem.rho));
    for (auto [i, j] : free_edges) {
        const double grad = w(i, j) - problem.sigma_hat(i, j);
        const double o = solution(i, j);
        if (o != 0.0)
            r = std::max(r, std::fabs(grad - problem.rho * (o > 0.0 ? 1.0 : -1.0)));
        else
            r = std::max(r, std::max(0.0, std::fabs(grad) - problem.rho));
    }
    return r;
}

inline GlassoSolution solve(const GlassoProblem& problem, const GlassoConfig& cfg = {},
                            const std::optional<SymMatrix>& warm_start = std::nullopt) {
    if (problem.rho < 0.0) throw InvalidPenalty("glasso: rho must be >= 0");
    if (cfg.tol <= 0.0) throw Error("glasso: tol must be > 0");
    const int p = problem.sigma_hat.dim();
    for (int i = 0; i < p; ++i) {
        if (problem.sigma_hat(i, i) < 0.0) throw Error("glasso: sigma_hat has negative diagonal");
        if (problem.sigma_hat(i, i) + problem.rho <= 0.0) throw NotPositiveDefinite(i);
    }

    const auto free_edges = detail::free_offdiagonals(problem);

    SymMatrix omega(p);
    bool warm_ok = false;
    if (warm_start && warm_start->dim() == p) {
        SymMatrix cand = *warm_start;
        // entries outside the support must be exactly zero
        if (problem.support) {
            for (int i = 0; i < p; ++i)
                for (int j = i + 1; j < p; ++j)
                    if (!problem.support->has_edge(i, j)) cand.set(i, j, 0.0);
        }
        if (is_positive_definite(cand)) {
            omega = cand;
            warm_ok = true;
        }
    }
    if (!warm_ok) {
        for (int i = 0; i < p; ++i) omega.set(i, i, 1.0 / (problem.sigma_hat(i, i) + problem.rho));
    }

    SymMatrix w = inverse(cholesky(omega));

    GlassoSolution sol{omega, 0.0, 0.0, 0, false, {}};
    const double min_step = 1e-15;

    for (int sweep = 1; sweep <= cfg.max_iter; ++sweep) {
        for (int i = 0; i < p; ++i) {
            const double t = 1.0 / (problem.sigma_hat(i, i) + problem.rho) - 1.0 / w(i, i);
            if (std::fabs(t) <= min_step * (1.0 + std::fabs(sol.omega_star(i, i)))) continue;
            sol.omega_star.add(i, i, t);
            detail::rank_one_inverse_update(w, i, t);
        }
        for (auto [i, j] : free_edges) {
            const double o = sol.omega_star(i, j);
            const double t = detail::offdiag_step(w(i, i), w(j, j), w(i, j), problem.sigma_hat(i, j),
                                                  problem.rho, o);
            if (std::fabs(t) <= min_step * (1.0 + std::fabs(o))) continue;
            if (t == -o)
                sol.omega_star.set(i, j, 0.0);
            else
                sol.omega_star.set(i, j, o + t);
            detail::rank_two_inverse_update(w, i, j, t);
        }

        // Refresh the inverse from a fresh factorization to stop drift, then
        // test optimality.
        const CholeskyFactor f = cholesky(sol.omega_star);
        w = inverse(f);
        sol.iterations = sweep;
        sol.objective =
            detail::glasso_objective(sol.omega_star, problem.sigma_hat, problem.rho, free_edges, log_det(f));
        sol.objective_trace.push_back(sol.objective);

        double r = 0.0;
        for (int i = 0; i < p; ++i)
            r = std::max(r, std::fabs(w(i, i) - problem.sigma_hat(i, i) - problem.rho));
        for (auto [i, j] : free_edges) {
            const double grad = w(i, j) - problem.sigma_hat(i, j);
            const double o = sol.omega_star(i, j);
            if (o != 0.0)
                r = std::max(r, std::fabs(grad - problem.rho * (o > 0.0 ? 1.0 : -1.0)));
            else
                r = std::max(r, std::max(0.0, std::fabs(grad) - problem.rho));
        }
        sol.kkt_residual = r;
        if (r <= cfg.tol) {
            sol.converged = true;
            break;
        }
    }
    return sol;
}

// Edges of the support whose solution entry vanished (the non-regular set).
inline std::vector<Edge> zero_set(const GlassoSolution& solution, const GraphStructure& support,
                                  double threshold) {
    std::vector<Edge> zs;
    for (auto [i, j] : support.edges())
        if (std::fabs(solution.omega_star(i, j)) <= threshold) zs.emplace_back(i, j);
    return zs;
}

inline double default_zero_threshold(const GlassoSolution& solution) {
    return 1e-8 * (1.0 + solution.omega_star.max_abs());
}

}  // namespace ggsel
