#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "errors.hpp"

namespace ggsel {

// Dense symmetric matrix, full row-major storage with both triangles kept in
// sync through set(). Dimensions in scope are small (p up to a few hundred),
// so no packed or sparse formats.
class SymMatrix {
  public:
    SymMatrix() : SymMatrix(1) {}

    explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {
        if (dim < 1) throw Error("SymMatrix: dim must be >= 1");
    }

    static SymMatrix identity(int dim) {
        SymMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.a_[static_cast<std::size_t>(i) * dim + i] = 1.0;
        return m;
    }

    int dim() const { return dim_; }

    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * dim_ + j]; }

    void set(int i, int j, double v) {
        a_[static_cast<std::size_t>(i) * dim_ + j] = v;
        a_[static_cast<std::size_t>(j) * dim_ + i] = v;
    }

    void add(int i, int j, double v) { set(i, j, (*this)(i, j) + v); }

    // Raw row-major storage; callers that write through it must keep both
    // triangles equal.
    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::fabs(v));
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (double v : a_) s += v * v;
        return std::sqrt(s);
    }

    double trace() const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
        return s;
    }

    bool operator==(const SymMatrix& o) const { return dim_ == o.dim_ && a_ == o.a_; }

  private:
    int dim_;
    std::vector<double> a_;
};

// tr(A B) for symmetric A, B of equal dimension.
inline double trace_product(const SymMatrix& a, const SymMatrix& b) {
    const int p = a.dim();
    const double* pa = a.data();
    const double* pb = b.data();
    double s = 0.0;
    for (std::size_t k = 0, n = static_cast<std::size_t>(p) * p; k < n; ++k) s += pa[k] * pb[k];
    return s;
}

// Lower-triangular Cholesky factor L with L L^T = source.
class CholeskyFactor {
  public:
    CholeskyFactor(int dim, std::vector<double> lower) : dim_(dim), l_(std::move(lower)) {}

    int dim() const { return dim_; }
    double lower(int i, int j) const { return l_[static_cast<std::size_t>(i) * dim_ + j]; }

    // Solves L y = b in place.
    void forward_solve(double* b) const {
        for (int i = 0; i < dim_; ++i) {
            double s = b[i];
            const double* row = &l_[static_cast<std::size_t>(i) * dim_];
            for (int j = 0; j < i; ++j) s -= row[j] * b[j];
            b[i] = s / row[i];
        }
    }

    // Solves L^T y = b in place.
    void backward_solve(double* b) const {
        for (int i = dim_ - 1; i >= 0; --i) {
            double s = b[i];
            for (int j = i + 1; j < dim_; ++j) s -= l_[static_cast<std::size_t>(j) * dim_ + i] * b[j];
            b[i] = s / l_[static_cast<std::size_t>(i) * dim_ + i];
        }
    }

    // Solves (L L^T) x = b in place.
    void solve(double* b) const {
        forward_solve(b);
        backward_solve(b);
    }

  private:
    int dim_;
    std::vector<double> l_;  // row-major, upper part zero
};

// Scale-invariant pivot tolerance: a pivot <= 1e-12 * max diagonal entry of
// the input counts as failure.
inline CholeskyFactor cholesky(const SymMatrix& m) {
    const int p = m.dim();
    double max_diag = 0.0;
    for (int i = 0; i < p; ++i) max_diag = std::max(max_diag, m(i, i));
    const double tol = 1e-12 * max_diag;

    std::vector<double> l(static_cast<std::size_t>(p) * p, 0.0);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = m(i, j);
            const double* ri = &l[static_cast<std::size_t>(i) * p];
            const double* rj = &l[static_cast<std::size_t>(j) * p];
            for (int k = 0; k < j; ++k) s -= ri[k] * rj[k];
            if (i == j) {
                if (s <= tol) throw NotPositiveDefinite(i);
                l[static_cast<std::size_t>(i) * p + j] = std::sqrt(s);
            } else {
                l[static_cast<std::size_t>(i) * p + j] = s / l[static_cast<std::size_t>(j) * p + j];
            }
        }
    }
    return CholeskyFactor(p, std::move(l));
}

inline bool is_positive_definite(const SymMatrix& m) {
    try {
        cholesky(m);
        return true;
    } catch (const NotPositiveDefinite&) {
        return false;
    }
}

inline double log_det(const CholeskyFactor& f) {
    double s = 0.0;
    for (int i = 0; i < f.dim(); ++i) s += std::log(f.lower(i, i));
    return 2.0 * s;
}

inline SymMatrix inverse(const CholeskyFactor& f) {
    const int p = f.dim();
    SymMatrix inv(p);
    std::vector<double> e(p);
    for (int j = 0; j < p; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        f.solve(e.data());
        for (int i = j; i < p; ++i) inv.set(i, j, e[i]);
    }
    return inv;
}

inline SymMatrix inverse(const SymMatrix& m) { return inverse(cholesky(m)); }

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
// Values only; adequate for the dimensions in scope.
inline std::vector<double> jacobi_eigenvalues(const SymMatrix& m, double tol = 1e-12) {
    const int p = m.dim();
    SymMatrix a = m;
    const double scale = std::max(a.frobenius(), 1e-300);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) off += a(i, j) * a(i, j);
        if (std::sqrt(2.0 * off) <= tol * scale) break;

        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) {
                const double apq = a(i, j);
                if (apq == 0.0) continue;
                const double tau = (a(j, j) - a(i, i)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int k = 0; k < p; ++k) {
                    if (k == i || k == j) continue;
                    const double aki = a(k, i), akj = a(k, j);
                    a.set(k, i, c * aki - s * akj);
                    a.set(k, j, s * aki + c * akj);
                }
                const double aii = a(i, i), ajj = a(j, j);
                a.set(i, i, aii - t * apq);
                a.set(j, j, ajj + t * apq);
                a.set(i, j, 0.0);
            }
        }
    }

    std::vector<double> eig(p);
    for (int i = 0; i < p; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

struct MatrixNorms {
    double frobenius;
    double max_abs;
    double spectral;
};

inline MatrixNorms norms(const SymMatrix& m) {
    const auto eig = jacobi_eigenvalues(m);
    double spec = 0.0;
    for (double e : eig) spec = std::max(spec, std::fabs(e));
    return MatrixNorms{m.frobenius(), m.max_abs(), spec};
}

}  // namespace ggsel
