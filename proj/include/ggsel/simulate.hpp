#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "data.hpp"
#include "errors.hpp"
#include "glasso.hpp"
#include "graph.hpp"
#include "prior.hpp"
#include "rng.hpp"
#include "search.hpp"
#include "sym_matrix.hpp"

namespace ggsel {

enum class TruthFamily { AR1, AR2, Star, Circle };

inline std::string family_name(TruthFamily f) {
    switch (f) {
        case TruthFamily::AR1: return "ar1";
        case TruthFamily::AR2: return "ar2";
        case TruthFamily::Star: return "star";
        case TruthFamily::Circle: return "circle";
    }
    return "?";
}

struct TruthSpec {
    TruthFamily family;
    int p;
};

struct TruthMatrices {
    std::optional<SymMatrix> sigma;  // only the AR1 family is specified through sigma
    SymMatrix omega;
    GraphStructure graph;
};

// The four benchmark precision structures. AR1 is given through its
// covariance sigma_ij = 0.7^|i-j|, whose inverse is exactly tridiagonal; the
// others are given directly as banded/star/cycle precision matrices.
inline TruthMatrices truth_matrices(const TruthSpec& spec) {
    const int p = spec.p;
    if (p < 2) throw ConfigError("truth_matrices: p must be >= 2");
    if ((spec.family == TruthFamily::AR2 || spec.family == TruthFamily::Circle) && p < 3)
        throw ConfigError("truth_matrices: this family needs p >= 3");

    switch (spec.family) {
        case TruthFamily::AR1: {
            SymMatrix sigma(p);
            for (int i = 0; i < p; ++i)
                for (int j = i; j < p; ++j) sigma.set(i, j, std::pow(0.7, j - i));
            SymMatrix omega = inverse(cholesky(sigma));
            std::vector<Edge> edges;
            for (int i = 0; i + 1 < p; ++i) edges.emplace_back(i, i + 1);
            return TruthMatrices{sigma, std::move(omega), GraphStructure(p, std::move(edges))};
        }
        case TruthFamily::AR2: {
            SymMatrix omega(p);
            std::vector<Edge> edges;
            for (int i = 0; i < p; ++i) omega.set(i, i, 1.0);
            for (int i = 0; i + 1 < p; ++i) {
                omega.set(i, i + 1, 0.5);
                edges.emplace_back(i, i + 1);
            }
            for (int i = 0; i + 2 < p; ++i) {
                omega.set(i, i + 2, 0.25);
                edges.emplace_back(i, i + 2);
            }
            cholesky(omega);  // positive definiteness assertion
            return TruthMatrices{std::nullopt, std::move(omega), GraphStructure(p, std::move(edges))};
        }
        case TruthFamily::Star: {
            SymMatrix omega = SymMatrix::identity(p);
            std::vector<Edge> edges;
            for (int i = 1; i < p; ++i) {
                omega.set(0, i, 0.1);
                edges.emplace_back(0, i);
            }
            cholesky(omega);
            return TruthMatrices{std::nullopt, std::move(omega), GraphStructure(p, std::move(edges))};
        }
        case TruthFamily::Circle: {
            SymMatrix omega(p);
            std::vector<Edge> edges;
            for (int i = 0; i < p; ++i) omega.set(i, i, 2.0);
            for (int i = 0; i + 1 < p; ++i) {
                omega.set(i, i + 1, 1.0);
                edges.emplace_back(i, i + 1);
            }
            omega.set(0, p - 1, 0.9);
            edges.emplace_back(0, p - 1);
            cholesky(omega);
            return TruthMatrices{std::nullopt, std::move(omega), GraphStructure(p, std::move(edges))};
        }
    }
    throw ConfigError("truth_matrices: unknown family");
}

// n i.i.d. rows from N_p(0, omega^-1), deterministic per seed.
inline DataMatrix sample(const SymMatrix& omega, long n, std::uint64_t seed) {
    const int p = omega.dim();
    const SymMatrix sigma = inverse(cholesky(omega));
    const CholeskyFactor l = cholesky(sigma);
    Rng rng(seed);
    DataMatrix x(n, p);
    std::vector<double> z(p);
    for (long r = 0; r < n; ++r) {
        for (int k = 0; k < p; ++k) z[k] = rng.normal();
        for (int i = 0; i < p; ++i) {
            double s = 0.0;
            for (int k = 0; k <= i; ++k) s += l.lower(i, k) * z[k];
            x.at(r, i) = s;
        }
    }
    return x;
}

struct RecoveryMetrics {
    double sp = 0.0, se = 0.0, mcc = 0.0;
    long tp = 0, tn = 0, fp = 0, fn = 0;
};

// Edge confusion counts over all vertex pairs. Ratios with a zero denominator
// are reported as 0.
inline RecoveryMetrics metrics(const GraphStructure& estimated, const GraphStructure& truth) {
    if (estimated.p() != truth.p()) throw Error("metrics: vertex counts differ");
    RecoveryMetrics m;
    const int p = truth.p();
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            const bool e = estimated.has_edge(i, j), t = truth.has_edge(i, j);
            if (e && t)
                ++m.tp;
            else if (!e && !t)
                ++m.tn;
            else if (e)
                ++m.fp;
            else
                ++m.fn;
        }
    }
    m.sp = (m.tn + m.fp) > 0 ? static_cast<double>(m.tn) / (m.tn + m.fp) : 0.0;
    m.se = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
    const double den = static_cast<double>(m.tp + m.fp) * (m.tp + m.fn) *
                       static_cast<double>(m.tn + m.fp) * (m.tn + m.fn);
    m.mcc = den > 0.0 ? (static_cast<double>(m.tp) * m.tn - static_cast<double>(m.fp) * m.fn) /
                            std::sqrt(den)
                      : 0.0;
    return m;
}

struct MetricSummary {
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean; 0 when reps == 1
};

struct StudyResult {
    TruthSpec spec;
    long n = 0;
    int reps = 0;
    MetricSummary sp, se, mcc;           // median probability model
    MetricSummary gl_sp, gl_se, gl_mcc;  // plain glasso support, for comparison
};

namespace detail {

inline MetricSummary summarize(const std::vector<double>& xs) {
    MetricSummary s;
    const int k = static_cast<int>(xs.size());
    for (double v : xs) s.mean += v;
    s.mean /= k;
    if (k > 1) {
        double var = 0.0;
        for (double v : xs) var += (v - s.mean) * (v - s.mean);
        s.se = std::sqrt(var / (k - 1) / k);
    }
    return s;
}

}  // namespace detail

// Full replication pipeline: sample -> covariance -> posterior search ->
// median probability model -> recovery metrics, with the unrestricted glasso
// support (|omega*| > 1e-8) tracked alongside.
inline StudyResult run_study(const TruthSpec& spec, long n, int reps, const GraphPrior& prior,
                             const SearchConfig& search_cfg, std::uint64_t seed) {
    if (reps < 1) throw ConfigError("run_study: reps must be >= 1");
    const TruthMatrices truth = truth_matrices(spec);

    std::vector<double> sp, se, mcc, gsp, gse, gmcc;
    for (int rep = 0; rep < reps; ++rep) {
        const DataMatrix x = sample(truth.omega, n, seed + static_cast<std::uint64_t>(rep));
        const SymMatrix cov = sample_covariance(x);

        SearchConfig cfg = search_cfg;
        cfg.seed = Rng::derive(seed + static_cast<std::uint64_t>(rep), 0x5ea7c4);
        const PosteriorSummary summary = run_search(cov, static_cast<int>(n), prior, cfg);
        const RecoveryMetrics m = metrics(summary.median_model, truth.graph);
        sp.push_back(m.sp);
        se.push_back(m.se);
        mcc.push_back(m.mcc);

        const GlassoSolution gl = solve(GlassoProblem{cov, prior.lambda / n, std::nullopt});
        std::vector<Edge> gl_edges;
        for (int i = 0; i < spec.p; ++i)
            for (int j = i + 1; j < spec.p; ++j)
                if (std::fabs(gl.omega_star(i, j)) > 1e-8) gl_edges.emplace_back(i, j);
        const RecoveryMetrics gm = metrics(GraphStructure(spec.p, std::move(gl_edges)), truth.graph);
        gsp.push_back(gm.sp);
        gse.push_back(gm.se);
        gmcc.push_back(gm.mcc);
    }

    StudyResult out;
    out.spec = spec;
    out.n = n;
    out.reps = reps;
    out.sp = detail::summarize(sp);
    out.se = detail::summarize(se);
    out.mcc = detail::summarize(mcc);
    out.gl_sp = detail::summarize(gsp);
    out.gl_se = detail::summarize(gse);
    out.gl_mcc = detail::summarize(gmcc);
    return out;
}

}  // namespace ggsel
