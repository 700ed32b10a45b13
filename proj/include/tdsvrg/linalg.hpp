#pragma once

// Minimal dense linear algebra for small matrices: LU solves, symmetric
// eigenvalues via cyclic Jacobi, stationary distributions of stochastic
// matrices. Everything here is sized for desk-scale problems (n <= ~1000).

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tdsvrg/errors.hpp"

namespace tdsvrg {

using Vector = std::vector<double>;

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    Vector row(std::size_t i) const {
        return Vector(a_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                      a_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> a_;
};

inline double dot(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2_sq(const Vector& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

inline double norm2(const Vector& x) { return std::sqrt(norm2_sq(x)); }

inline double norm_inf(const Vector& x) {
    double s = 0.0;
    for (double v : x) s = std::max(s, std::abs(v));
    return s;
}

inline Vector operator+(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) throw DimensionMismatch("vector add: length mismatch");
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] + y[i];
    return z;
}

inline Vector operator-(const Vector& x, const Vector& y) {
    if (x.size() != y.size()) throw DimensionMismatch("vector sub: length mismatch");
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
    return z;
}

inline Vector operator*(double c, const Vector& x) {
    Vector z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = c * x[i];
    return z;
}

inline void axpy(double c, const Vector& x, Vector& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vector matvec(const Matrix& m, const Vector& x) {
    if (m.cols() != x.size()) throw DimensionMismatch("matvec: size mismatch");
    Vector y(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * x[j];
        y[i] = s;
    }
    return y;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionMismatch("matmul: size mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

inline double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

// Quadratic form x^T M y.
inline double quad_form(const Vector& x, const Matrix& m, const Vector& y) {
    return dot(x, matvec(m, y));
}

constexpr double kSingularPivot = 1e-12;

// Ceiling with a small relative slack, so quantities that are integers in
// exact arithmetic (e.g. 16 / 0.25) do not round up an extra step when the
// eigenvalue underneath carries float noise.
inline std::size_t ceil_to_size(double x) {
    if (x <= 1.0) return 1;
    const double slack = 1e-9 * std::max(1.0, std::abs(x));
    return static_cast<std::size_t>(std::ceil(x - slack));
}

// Partial-pivot LU solve. Throws SingularMatrix when a pivot falls below
// kSingularPivot, which the callers treat as an Assumption-1 violation.
inline Vector solve_linear(Matrix m, Vector rhs) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw DimensionMismatch("solve_linear: matrix not square");
    if (rhs.size() != n) throw DimensionMismatch("solve_linear: rhs length mismatch");

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(m(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(m(i, k)) > best) {
                best = std::abs(m(i, k));
                piv = i;
            }
        }
        if (best < kSingularPivot)
            throw SingularMatrix("solve_linear: pivot below 1e-12 at column " + std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
            std::swap(rhs[k], rhs[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double l = m(i, k) / m(k, k);
            if (l == 0.0) continue;
            m(i, k) = 0.0;
            for (std::size_t j = k + 1; j < n; ++j) m(i, j) -= l * m(k, j);
            rhs[i] -= l * rhs[k];
        }
    }
    Vector x(n, 0.0);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = rhs[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= m(ii, j) * x[j];
        x[ii] = s / m(ii, ii);
    }
    return x;
}

struct SymEigResult {
    Vector eigenvalues; // ascending
    double min() const { return eigenvalues.front(); }
    double max() const { return eigenvalues.back(); }
};

// Cyclic Jacobi with a deterministic sweep order; fine for the matrix sizes
// used here (d <= ~100).
inline SymEigResult sym_eigenvalues(const Matrix& m, double sym_tol = 1e-10) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw DimensionMismatch("sym_eigenvalues: matrix not square");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > sym_tol)
                throw NotSymmetric("sym_eigenvalues: asymmetry exceeds tolerance at (" +
                                   std::to_string(i) + "," + std::to_string(j) + ")");

    Matrix a = m;
    // symmetrize exactly so rotations stay consistent
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = v;
            a(j, i) = v;
        }

    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-28 * (1.0 + frobenius_norm(a))) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    SymEigResult r;
    r.eigenvalues.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.eigenvalues[i] = a(i, i);
    std::sort(r.eigenvalues.begin(), r.eigenvalues.end());
    return r;
}

inline double min_eig_sym(const Matrix& m) { return sym_eigenvalues(m).min(); }
inline double max_eig_sym(const Matrix& m) { return sym_eigenvalues(m).max(); }

inline void check_row_stochastic(const Matrix& p, double tol = 1e-10) {
    if (p.rows() != p.cols()) throw NotStochastic("matrix not square");
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if (p(i, j) < -tol)
                throw NotStochastic("negative entry at row " + std::to_string(i));
            s += p(i, j);
        }
        if (std::abs(s - 1.0) > tol)
            throw NotStochastic("row " + std::to_string(i) + " sums to " + std::to_string(s));
    }
}

// Stationary distribution via the null space of (P^T - I): replace the last
// equation with the normalization constraint and solve. Power iteration is
// deliberately avoided -- periodic chains (e.g. the 2-state flip chain) have
// a unique stationary distribution but no power-iteration limit.
inline Vector stationary_distribution(const Matrix& p, double tol = 1e-10) {
    check_row_stochastic(p, tol);
    const std::size_t n = p.rows();
    if (n == 1) return Vector{1.0};

    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = p(j, i) - (i == j ? 1.0 : 0.0);
    for (std::size_t j = 0; j < n; ++j) m(n - 1, j) = 1.0;
    Vector rhs(n, 0.0);
    rhs[n - 1] = 1.0;

    Vector mu;
    try {
        mu = solve_linear(m, rhs);
    } catch (const SingularMatrix&) {
        throw NonUniqueStationary("stationary_distribution: (P^T - I) null space has dimension > 1");
    }

    // Reducible chains can still produce a solvable system with negative
    // entries or a bad residual; both signal non-uniqueness.
    double residual = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += mu[i] * p(i, j);
        residual = std::max(residual, std::abs(s - mu[j]));
    }
    double total = 0.0;
    for (double& v : mu) {
        if (v < -1e-9) throw NonUniqueStationary("stationary_distribution: negative component");
        v = std::max(v, 0.0);
        total += v;
    }
    for (double& v : mu) v /= total;
    if (residual > 1e-8)
        throw NonUniqueStationary("stationary_distribution: residual " + std::to_string(residual));
    return mu;
}

} // namespace tdsvrg
