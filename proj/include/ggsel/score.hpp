#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "glasso.hpp"
#include "graph.hpp"
#include "prior.hpp"
#include "sym_matrix.hpp"

namespace ggsel {

// Penalized negative log-likelihood per observation:
//   h(O) = -log det(O) + tr(sigma_hat O) + (2 lambda/n) sum_{edges} |o_ij| + (lambda/n) sum_i o_ii
// with the off-diagonal sum running over the graph's edges; omega must vanish
// off the graph.
inline double h_value(const SymMatrix& omega, const SymMatrix& sigma_hat, double lambda, int n,
                      const GraphStructure& g) {
    const int p = omega.dim();
    if (g.p() != p || sigma_hat.dim() != p) throw Error("h_value: dimension mismatch");
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (omega(i, j) != 0.0 && !g.has_edge(i, j))
                throw Error("h_value: omega has mass outside the graph support");

    const double ld = log_det(cholesky(omega));
    double pen_off = 0.0;
    for (auto [i, j] : g.edges()) pen_off += std::fabs(omega(i, j));
    double pen_diag = 0.0;
    for (int i = 0; i < p; ++i) pen_diag += omega(i, i);
    return -ld + trace_product(sigma_hat, omega) +
           (2.0 * lambda / n) * pen_off + (lambda / n) * pen_diag;
}

struct HessianMatrix {
    FreeIndexSet index;
    SymMatrix entries;
};

// Curvature of the smooth part of h at omega, restricted to the free entries:
// entry [(i,j),(l,m)] = tr(W E_(i,j) W E_(l,m)) with W = omega^-1, which
// collapses to products of W entries.
inline HessianMatrix hessian_at(const SymMatrix& omega, const FreeIndexSet& idx) {
    const SymMatrix w = inverse(cholesky(omega));
    const int d = idx.size();
    SymMatrix h(d);
    for (int a = 0; a < d; ++a) {
        const auto [i, j] = idx[a];
        for (int b = a; b < d; ++b) {
            const auto [l, m] = idx[b];
            double v;
            if (i == j && l == m)
                v = w(i, l) * w(i, l);
            else if (i == j)
                v = 2.0 * w(i, l) * w(i, m);
            else if (l == m)
                v = 2.0 * w(i, l) * w(j, l);
            else
                v = 2.0 * (w(i, l) * w(j, m) + w(i, m) * w(j, l));
            h.set(a, b, v);
        }
    }
    return HessianMatrix{idx, std::move(h)};
}

struct ModelScore {
    GraphStructure graph;  // the regular graph this score belongs to
    std::optional<GraphStructure> reduced_from;  // original request, when the
                                                 // solver zeroed some of its edges
    double log_prior = 0.0;
    double log_fit = 0.0;          // -n h(omega*) / 2
    double dims_term = 0.0;        // (#free/2) log(4 pi / n)
    double log_det_hessian = 0.0;
    double total = 0.0;            // log_prior + log_fit + dims_term - log_det_hessian/2
    bool regular = true;
};

struct ScoredModel {
    GraphStructure graph;
    double probability;
    ModelScore score;
};

struct PosteriorSummary {
    std::vector<ScoredModel> models;  // descending probability
    std::map<Edge, double> edge_inclusion;
    GraphStructure median_model;
    long visited_count = 0;
    long accepted_moves = 0;  // stochastic search diagnostics
    long proposed_moves = 0;
};

// Laplace score of one graph. The solver runs on the graph's support; when it
// zeroes an included edge the model is not differentiable there, the losing
// edges are dropped, and the reduced regular submodel is scored instead (its
// solution coincides with the original one on the surviving entries).
inline ModelScore score_model(const GraphStructure& g, const SymMatrix& sigma_hat, int n,
                              const GraphPrior& prior, const GlassoConfig& solver_cfg = {},
                              const std::optional<SymMatrix>& warm_start = std::nullopt,
                              SymMatrix* omega_out = nullptr) {
    if (g.p() != sigma_hat.dim()) throw Error("score_model: dimension mismatch");
    if (n < 2) throw Error("score_model: n must be >= 2");

    const double rho = prior.lambda / n;
    GraphStructure current = g;
    GlassoSolution sol =
        solve(GlassoProblem{sigma_hat, rho, current}, solver_cfg, warm_start);
    if (!sol.converged) throw SolverDiverged("score_model: glasso did not converge");

    std::optional<GraphStructure> original;
    for (int guard = 0; guard <= max_pair_count(g.p()); ++guard) {
        const auto zs = zero_set(sol, current, default_zero_threshold(sol));
        if (zs.empty()) break;
        if (!original) original = g;
        current = current.without_edges(zs);
        SymMatrix warm = sol.omega_star;
        for (auto [i, j] : zs) warm.set(i, j, 0.0);
        sol = solve(GlassoProblem{sigma_hat, rho, current}, solver_cfg, warm);
        if (!sol.converged) throw SolverDiverged("score_model: glasso did not converge");
    }
    if (omega_out) *omega_out = sol.omega_star;

    const FreeIndexSet idx(current);
    const HessianMatrix hess = hessian_at(sol.omega_star, idx);
    const double ld_hess = log_det(cholesky(hess.entries));

    ModelScore ms;
    ms.graph = current;
    ms.reduced_from = original;
    ms.regular = !original.has_value();
    ms.log_prior = log_prior(prior, current).log_c_gamma;
    ms.log_fit = -0.5 * n * h_value(sol.omega_star, sigma_hat, prior.lambda, n, current);
    // Gaussian volume of the quadratic expansion of n h/2 around the mode:
    // (4 pi / n)^(d/2) det(H)^(-1/2).
    ms.dims_term = 0.5 * idx.size() * std::log(4.0 * 3.14159265358979323846 / n);
    ms.log_det_hessian = ld_hess;
    ms.total = ms.log_prior + ms.log_fit + ms.dims_term - 0.5 * ms.log_det_hessian;
    return ms;
}

// Renormalizes a batch of scores into model probabilities, per-edge inclusion
// probabilities, and the median probability model. Every entry carries a
// regular graph (reductions already applied); duplicates are merged keeping
// one entry, and their totals must agree.
inline PosteriorSummary normalize(const std::vector<ModelScore>& scores) {
    std::map<GraphStructure, ModelScore> distinct;
    for (const auto& s : scores) {
        if (!std::isfinite(s.total)) continue;
        auto [it, inserted] = distinct.emplace(s.graph, s);
        if (!inserted && std::fabs(it->second.total - s.total) > 1e-6)
            throw Error("normalize: duplicate graph with disagreeing totals");
    }
    if (distinct.empty()) throw EmptyModelSet("normalize: no scorable model");

    double max_total = -std::numeric_limits<double>::infinity();
    for (const auto& [g, s] : distinct) max_total = std::max(max_total, s.total);
    double z = 0.0;
    for (const auto& [g, s] : distinct) z += std::exp(s.total - max_total);

    PosteriorSummary out;
    const int p = distinct.begin()->first.p();
    for (const auto& [g, s] : distinct) {
        const double prob = std::exp(s.total - max_total) / z;
        out.models.push_back(ScoredModel{g, prob, s});
        for (auto e : g.edges()) out.edge_inclusion[e] += prob;
    }
    std::stable_sort(out.models.begin(), out.models.end(),
                     [](const ScoredModel& a, const ScoredModel& b) {
                         if (a.probability != b.probability) return a.probability > b.probability;
                         return a.graph < b.graph;
                     });

    std::vector<Edge> median_edges;
    for (const auto& [e, pr] : out.edge_inclusion)
        if (pr > 0.5) median_edges.push_back(e);
    out.median_model = GraphStructure(p, std::move(median_edges));
    out.visited_count = static_cast<long>(out.models.size());
    return out;
}

}  // namespace ggsel
