#pragma once

#include <cstdint>
#include <future>
#include <iostream>
#include <map>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "prior.hpp"
#include "rng.hpp"
#include "score.hpp"
#include "sym_matrix.hpp"

namespace ggsel {

enum class SearchMode { Enumerate, Stochastic };

struct SearchConfig {
    SearchMode mode = SearchMode::Enumerate;
    int max_edges = 0;
    long steps = 1;
    int restarts = 1;
    std::uint64_t seed = 0;
    double temperature = 1.0;
    int threads = 1;
    bool progress = false;  // one stderr line per 1000 steps
};

inline int truncation_cap(const GraphPrior& prior, int p) {
    if (const auto* hard = std::get_if<HardCap>(&prior.truncation))
        return std::min(hard->r_bar, max_pair_count(p));
    return max_pair_count(p);
}

// Enumerate when the pair count is small, otherwise walk.
inline SearchConfig default_search_config(int p, const GraphPrior& prior, std::uint64_t seed = 0) {
    SearchConfig cfg;
    cfg.max_edges = truncation_cap(prior, p);
    cfg.seed = seed;
    if (max_pair_count(p) <= 20) {
        cfg.mode = SearchMode::Enumerate;
    } else {
        cfg.mode = SearchMode::Stochastic;
        cfg.steps = 200L * max_pair_count(p);
        cfg.restarts = 3;
    }
    return cfg;
}

inline PosteriorSummary search_exact(const SymMatrix& data_cov, int n, const GraphPrior& prior,
                                     const SearchConfig& cfg) {
    const int p = data_cov.dim();
    if (max_pair_count(p) > 30) throw TooLarge("search_exact: p(p-1)/2 exceeds 30");
    const GlassoConfig solver_cfg;

    // One entry per effective (possibly reduced) graph; scoring is
    // deterministic, so the first score wins.
    std::map<GraphStructure, ModelScore> by_graph;
    long scored = 0;
    GraphEnumerator en(p, std::min(cfg.max_edges, truncation_cap(prior, p)));
    while (auto g = en.next()) {
        const ModelScore ms = score_model(*g, data_cov, n, prior, solver_cfg);
        ++scored;
        by_graph.emplace(ms.graph, ms);
    }

    std::vector<ModelScore> scores;
    scores.reserve(by_graph.size());
    for (const auto& [g, s] : by_graph) scores.push_back(s);
    PosteriorSummary out = normalize(scores);
    out.visited_count = scored;
    return out;
}

namespace detail {

struct WalkResult {
    std::map<GraphStructure, ModelScore> visited;
    long accepted = 0;
    long proposed = 0;
};

inline WalkResult run_walk(const SymMatrix& data_cov, int n, const GraphPrior& prior,
                           const SearchConfig& cfg, int restart) {
    const int p = data_cov.dim();
    const GlassoConfig solver_cfg;
    Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(restart)));

    std::vector<Edge> pairs;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) pairs.emplace_back(i, j);

    // Restart 0 starts empty; later restarts from a small random graph.
    GraphStructure state(p);
    if (restart > 0) {
        const int budget = std::min(cfg.max_edges, p);
        const long k = budget > 0 ? static_cast<long>(rng.uniform_below(budget + 1)) : 0;
        for (long added = 0; added < k;) {
            const Edge e = pairs[rng.uniform_below(pairs.size())];
            if (!state.has_edge(e.first, e.second)) {
                state = state.with_edge(e.first, e.second);
                ++added;
            }
        }
    }

    WalkResult res;
    SymMatrix state_omega(p);
    ModelScore state_score =
        score_model(state, data_cov, n, prior, solver_cfg, std::nullopt, &state_omega);
    state = state_score.graph;
    res.visited.emplace(state_score.graph, state_score);
    if (pairs.empty()) {
        res.proposed = cfg.steps;
        return res;
    }

    SymMatrix prop_omega(p);
    for (long step = 1; step <= cfg.steps; ++step) {
        if (cfg.progress && step % 1000 == 0)
            std::cerr << "search: restart " << restart << " step " << step << "/" << cfg.steps
                      << " visited " << res.visited.size() << "\n";
        ++res.proposed;
        const Edge e = pairs[rng.uniform_below(pairs.size())];
        const bool adding = !state.has_edge(e.first, e.second);
        const double u = rng.uniform();  // drawn unconditionally to keep the stream aligned
        if (adding && state.edge_count() + 1 > cfg.max_edges) continue;  // outside prior support

        const GraphStructure proposal =
            adding ? state.with_edge(e.first, e.second) : state.without_edge(e.first, e.second);

        ModelScore prop_score;
        bool fresh = false;
        if (const auto it = res.visited.find(proposal); it != res.visited.end()) {
            prop_score = it->second;  // direct score, or the reduction alias
        } else {
            try {
                prop_score =
                    score_model(proposal, data_cov, n, prior, solver_cfg, state_omega, &prop_omega);
            } catch (const SolverDiverged&) {
                continue;
            }
            fresh = true;
            res.visited.emplace(prop_score.graph, prop_score);
            if (!(prop_score.graph == proposal)) {
                // remember the reduction so re-proposals skip the solve
                res.visited.emplace(proposal, prop_score);
            }
        }

        if (std::log(u) * cfg.temperature <= prop_score.total - state_score.total) {
            state = prop_score.graph;
            state_score = prop_score;
            if (fresh) {
                state_omega = prop_omega;
            } else {
                const GlassoSolution s =
                    solve(GlassoProblem{data_cov, prior.lambda / n, state}, solver_cfg, state_omega);
                state_omega = s.omega_star;
            }
            ++res.accepted;
        }
    }
    return res;
}

}  // namespace detail

// Metropolized single-edge walk over regular graphs. Model probabilities come
// from renormalizing the Laplace scores of the distinct models seen, not from
// visit frequencies, so the output is invariant to visit order and exact once
// every mass-bearing model has been reached. Deterministic given the seed,
// independent of the thread count.
inline PosteriorSummary search_stochastic(const SymMatrix& data_cov, int n, const GraphPrior& prior,
                                          const SearchConfig& cfg) {
    if (cfg.steps < 1) throw ConfigError("search: steps must be >= 1");
    if (cfg.restarts < 1) throw ConfigError("search: restarts must be >= 1");
    if (!(cfg.temperature > 0.0)) throw ConfigError("search: temperature must be > 0");

    std::vector<detail::WalkResult> parts(cfg.restarts);
    if (cfg.threads <= 1 || cfg.restarts == 1) {
        for (int r = 0; r < cfg.restarts; ++r)
            parts[r] = detail::run_walk(data_cov, n, prior, cfg, r);
    } else {
        std::vector<std::future<detail::WalkResult>> futs;
        for (int r = 0; r < cfg.restarts; ++r)
            futs.push_back(std::async(std::launch::async,
                                      [&, r] { return detail::run_walk(data_cov, n, prior, cfg, r); }));
        for (int r = 0; r < cfg.restarts; ++r) parts[r] = futs[r].get();
    }

    std::map<GraphStructure, ModelScore> merged;
    long accepted = 0, proposed = 0;
    for (const auto& part : parts) {
        for (const auto& [g, s] : part.visited)
            if (s.graph == g) merged.emplace(g, s);  // skip reduction aliases
        accepted += part.accepted;
        proposed += part.proposed;
    }

    std::vector<ModelScore> scores;
    scores.reserve(merged.size());
    for (const auto& [g, s] : merged) scores.push_back(s);
    PosteriorSummary out = normalize(scores);
    out.visited_count = static_cast<long>(merged.size());
    out.accepted_moves = accepted;
    out.proposed_moves = proposed;
    return out;
}

inline PosteriorSummary run_search(const SymMatrix& data_cov, int n, const GraphPrior& prior,
                                   const SearchConfig& cfg) {
    return cfg.mode == SearchMode::Enumerate ? search_exact(data_cov, n, prior, cfg)
                                             : search_stochastic(data_cov, n, prior, cfg);
}

}  // namespace ggsel
