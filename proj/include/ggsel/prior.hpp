#pragma once

#include <cmath>
#include <limits>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"

namespace ggsel {

// Edge-count truncation of the Bernoulli(q) edge prior: either a hard cap on
// the number of edges, or a random cap R with P(R = m) proportional to
// exp(-a2 m log m), m >= 1, truncated at p(p-1)/2.
struct HardCap {
    int r_bar = 0;
};
struct Hierarchical {
    double a1 = 1.0;
    double a2 = 1.0;
};

struct GraphPrior {
    double q = 0.4;        // edge inclusion probability, must be < 1/2
    double lambda = 1.0;   // Laplace/exponential scale on precision entries
    std::variant<HardCap, Hierarchical> truncation = HardCap{0};

    void validate() const {
        if (!(q > 0.0 && q < 0.5)) throw ConfigError("prior: q must lie in (0, 1/2)");
        if (!(lambda > 0.0)) throw ConfigError("prior: lambda must be > 0");
        if (auto* h = std::get_if<HardCap>(&truncation); h && h->r_bar < 0)
            throw ConfigError("prior: r_bar must be >= 0");
        if (auto* h = std::get_if<Hierarchical>(&truncation); h && (h->a1 <= 0.0 || h->a2 <= 0.0))
            throw ConfigError("prior: a1, a2 must be > 0");
    }
};

struct LogPriorMass {
    double log_gamma_prior;  // log of the truncated Bernoulli kernel, unnormalized
    double log_c_gamma;      // adds the (lambda/2)^(p+#edges) factor; the shared
                             // (2 pi)^(np/2) constant is dropped throughout
    bool in_support() const { return std::isfinite(log_c_gamma); }
};

namespace detail {

// log P(R >= m) under the default cap law, truncated at max_m.
inline double hierarchical_log_tail(int m, int max_m, double a2) {
    if (m <= 1) return 0.0;
    if (m > max_m) return -std::numeric_limits<double>::infinity();
    double total = 0.0, tail = 0.0;
    for (int k = 1; k <= max_m; ++k) {
        const double w = std::exp(-a2 * k * std::log(static_cast<double>(k)));
        total += w;
        if (k >= m) tail += w;
    }
    return std::log(tail) - std::log(total);
}

}  // namespace detail

inline LogPriorMass log_prior(const GraphPrior& prior, const GraphStructure& g) {
    prior.validate();
    const int m = g.edge_count();
    const int pairs = max_pair_count(g.p());
    const double neg_inf = -std::numeric_limits<double>::infinity();

    double log_beta;
    if (const auto* hard = std::get_if<HardCap>(&prior.truncation)) {
        log_beta = (m <= hard->r_bar) ? 0.0 : neg_inf;
    } else {
        const auto& h = std::get<Hierarchical>(prior.truncation);
        log_beta = detail::hierarchical_log_tail(m, pairs, h.a2);
    }

    const double kernel = m * std::log(prior.q) + (pairs - m) * std::log1p(-prior.q) + log_beta;
    const double c = kernel + (g.p() + m) * std::log(prior.lambda / 2.0);
    return LogPriorMass{kernel, c};
}

// Edge budget from the entropy-driven sieve rate: ceil(2 (p + s) log p / log n),
// capped at the number of vertex pairs.
inline int default_rbar(int n, int p, int s_guess) {
    if (n < 1 || p < 1) throw ConfigError("default_rbar: n, p must be >= 1");
    const int cap = max_pair_count(p);
    if (n == 1 || p == 1) return p == 1 ? 0 : cap;
    const double r = 2.0 * (p + s_guess) * std::log(static_cast<double>(p)) /
                     std::log(static_cast<double>(n));
    const int ri = static_cast<int>(std::ceil(r));
    return std::min(ri, cap);
}

}  // namespace ggsel
