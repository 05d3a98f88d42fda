#pragma once

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "sym_matrix.hpp"

namespace ggsel {

using Edge = std::pair<int, int>;  // 0-based, first < second

// Undirected graph over p vertices as a sorted duplicate-free edge set.
class GraphStructure {
  public:
    GraphStructure() : p_(1) {}  // single vertex, no edges

    explicit GraphStructure(int p, std::vector<Edge> edges = {}) : p_(p), edges_(std::move(edges)) {
        if (p < 1) throw Error("GraphStructure: p must be >= 1");
        std::sort(edges_.begin(), edges_.end());
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const auto [i, j] = edges_[k];
            if (i < 0 || j >= p_ || i >= j) throw Error("GraphStructure: edge out of range");
            if (k > 0 && edges_[k] == edges_[k - 1]) throw Error("GraphStructure: duplicate edge");
        }
    }

    int p() const { return p_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }

    bool has_edge(int i, int j) const {
        if (i > j) std::swap(i, j);
        return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
    }

    GraphStructure with_edge(int i, int j) const {
        if (i > j) std::swap(i, j);
        auto e = edges_;
        e.emplace_back(i, j);
        return GraphStructure(p_, std::move(e));
    }

    GraphStructure without_edge(int i, int j) const {
        if (i > j) std::swap(i, j);
        auto e = edges_;
        e.erase(std::remove(e.begin(), e.end(), Edge{i, j}), e.end());
        return GraphStructure(p_, std::move(e));
    }

    GraphStructure without_edges(const std::vector<Edge>& drop) const {
        auto e = edges_;
        for (auto d : drop) e.erase(std::remove(e.begin(), e.end(), d), e.end());
        return GraphStructure(p_, std::move(e));
    }

    bool operator==(const GraphStructure& o) const { return p_ == o.p_ && edges_ == o.edges_; }
    bool operator<(const GraphStructure& o) const {
        if (p_ != o.p_) return p_ < o.p_;
        return edges_ < o.edges_;
    }

  private:
    int p_;
    std::vector<Edge> edges_;
};

inline int max_pair_count(int p) { return p * (p - 1) / 2; }

inline bool is_submodel(const GraphStructure& sub, const GraphStructure& sup) {
    if (sub.p() != sup.p()) throw Error("is_submodel: vertex counts differ");
    return std::includes(sup.edges().begin(), sup.edges().end(), sub.edges().begin(), sub.edges().end());
}

// Free-entry index set for a graph: the p diagonal positions first, then the
// edges in lexicographic order. This ordering fixes the Hessian row/column
// layout everywhere.
class FreeIndexSet {
  public:
    explicit FreeIndexSet(const GraphStructure& g) : p_(g.p()) {
        pairs_.reserve(p_ + g.edge_count());
        for (int i = 0; i < p_; ++i) pairs_.emplace_back(i, i);
        for (auto e : g.edges()) pairs_.push_back(e);
    }

    int p() const { return p_; }
    int size() const { return static_cast<int>(pairs_.size()); }
    Edge operator[](int k) const { return pairs_[k]; }
    const std::vector<Edge>& pairs() const { return pairs_; }

  private:
    int p_;
    std::vector<Edge> pairs_;
};

// E_(i,j): ones at (i,j) and (j,i), a single one when i == j.
inline SymMatrix embedding_matrix(int p, int i, int j) {
    SymMatrix e(p);
    e.set(i, j, 1.0);
    return e;
}

inline std::vector<SymMatrix> embedding_basis(const FreeIndexSet& idx) {
    std::vector<SymMatrix> basis;
    basis.reserve(idx.size());
    for (auto [i, j] : idx.pairs()) basis.push_back(embedding_matrix(idx.p(), i, j));
    return basis;
}

inline std::vector<double> pack_free(const SymMatrix& m, const FreeIndexSet& idx) {
    std::vector<double> v(idx.size());
    for (int k = 0; k < idx.size(); ++k) v[k] = m(idx[k].first, idx[k].second);
    return v;
}

inline SymMatrix unpack_free(const std::vector<double>& v, const FreeIndexSet& idx) {
    SymMatrix m(idx.p());
    for (int k = 0; k < idx.size(); ++k) m.set(idx[k].first, idx[k].second, v[k]);
    return m;
}

// Streams every edge subset with at most max_edges edges, by size then in
// lexicographic order over the pair list; re-creatable and deterministic.
class GraphEnumerator {
  public:
    GraphEnumerator(int p, int max_edges) : p_(p), max_edges_(std::min(max_edges, max_pair_count(p))) {
        if (max_pair_count(p) > 30) throw TooLarge("enumerate_all: p(p-1)/2 exceeds 30");
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) pairs_.emplace_back(i, j);
        k_ = 0;
    }

    std::optional<GraphStructure> next() {
        while (k_ <= max_edges_) {
            if (!comb_started_) {
                comb_.resize(k_);
                for (int t = 0; t < k_; ++t) comb_[t] = t;
                comb_started_ = true;
                if (k_ <= static_cast<int>(pairs_.size())) return make_graph();
                // no subsets of this size
                comb_started_ = false;
                ++k_;
                continue;
            }
            if (advance()) return make_graph();
            comb_started_ = false;
            ++k_;
        }
        return std::nullopt;
    }

  private:
    GraphStructure make_graph() const {
        std::vector<Edge> e;
        e.reserve(comb_.size());
        for (int idx : comb_) e.push_back(pairs_[idx]);
        return GraphStructure(p_, std::move(e));
    }

    bool advance() {
        const int m = static_cast<int>(pairs_.size());
        int t = k_ - 1;
        while (t >= 0 && comb_[t] == m - k_ + t) --t;
        if (t < 0) return false;
        ++comb_[t];
        for (int u = t + 1; u < k_; ++u) comb_[u] = comb_[u - 1] + 1;
        return true;
    }

    int p_;
    int max_edges_;
    std::vector<Edge> pairs_;
    int k_ = 0;
    std::vector<int> comb_;
    bool comb_started_ = false;
};

inline std::vector<GraphStructure> enumerate_all(int p, int max_edges) {
    GraphEnumerator en(p, max_edges);
    std::vector<GraphStructure> out;
    while (auto g = en.next()) out.push_back(std::move(*g));
    return out;
}

// Edge-list text: one "i j" pair per line, 1-based, i < j.
inline std::string to_edge_list_text(const GraphStructure& g) {
    std::ostringstream os;
    for (auto [i, j] : g.edges()) os << (i + 1) << ' ' << (j + 1) << '\n';
    return os.str();
}

inline GraphStructure parse_edge_list(const std::string& text, int p) {
    std::istringstream is(text);
    std::vector<Edge> edges;
    int i, j;
    while (is >> i >> j) edges.emplace_back(i - 1, j - 1);
    return GraphStructure(p, std::move(edges));
}

}  // namespace ggsel
