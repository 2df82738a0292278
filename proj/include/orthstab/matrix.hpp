#pragma once

// Dense matrices over a Ring, plus per-factor elimination.
//
// Local routines take a factor index i and a matrix of *local* codes of R_i
// (see project/lift). All local rings here are chain rings, so an entry of
// minimal valuation divides everything in its column.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "ring.hpp"

namespace orthstab {

struct Matrix {
    std::size_t rows = 0, cols = 0;
    std::vector<Elem> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, Elem fill = 0) : rows(r), cols(c), data(r * c, fill) {}

    Elem& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    Elem operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
    friend auto operator<=>(const Matrix& a, const Matrix& b) {
        if (auto c = a.rows <=> b.rows; c != 0) return c;
        if (auto c = a.cols <=> b.cols; c != 0) return c;
        return a.data <=> b.data;
    }

    static Matrix identity(const Ring& R, std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = R.one();
        return m;
    }
    static Matrix diagonal(const std::vector<Elem>& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    std::vector<Elem> column(std::size_t c) const {
        std::vector<Elem> v(rows);
        for (std::size_t r = 0; r < rows; ++r) v[r] = (*this)(r, c);
        return v;
    }
    std::vector<Elem> row(std::size_t r) const {
        return {data.begin() + static_cast<std::ptrdiff_t>(r * cols), data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols)};
    }
    void set_column(std::size_t c, const std::vector<Elem>& v) {
        for (std::size_t r = 0; r < rows; ++r) (*this)(r, c) = v[r];
    }

    Matrix transpose() const {
        Matrix t(cols, rows);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
        return t;
    }
    bool is_square() const { return rows == cols; }
    bool is_symmetric() const {
        if (!is_square()) return false;
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = r + 1; c < cols; ++c)
                if ((*this)(r, c) != (*this)(c, r)) return false;
        return true;
    }

    /// Columns [c0, c0+n).
    Matrix columns(std::size_t c0, std::size_t n) const {
        Matrix m(rows, n);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < n; ++c) m(r, c) = (*this)(r, c0 + c);
        return m;
    }
    Matrix select_columns(const std::vector<std::size_t>& idx) const {
        Matrix m(rows, idx.size());
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < idx.size(); ++c) m(r, c) = (*this)(r, idx[c]);
        return m;
    }
    Matrix select_rows(const std::vector<std::size_t>& idx) const {
        Matrix m(idx.size(), cols);
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < cols; ++c) m(r, c) = (*this)(idx[r], c);
        return m;
    }
    /// [A | B]
    static Matrix hconcat(const Matrix& a, const Matrix& b) {
        if (a.rows != b.rows) throw ShapeError("hconcat: row counts differ");
        Matrix m(a.rows, a.cols + b.cols);
        for (std::size_t r = 0; r < a.rows; ++r) {
            for (std::size_t c = 0; c < a.cols; ++c) m(r, c) = a(r, c);
            for (std::size_t c = 0; c < b.cols; ++c) m(r, a.cols + c) = b(r, c);
        }
        return m;
    }
    static Matrix block_diag(const Matrix& a, const Matrix& b) {
        Matrix m(a.rows + b.rows, a.cols + b.cols);
        for (std::size_t r = 0; r < a.rows; ++r)
            for (std::size_t c = 0; c < a.cols; ++c) m(r, c) = a(r, c);
        for (std::size_t r = 0; r < b.rows; ++r)
            for (std::size_t c = 0; c < b.cols; ++c) m(a.rows + r, a.cols + c) = b(r, c);
        return m;
    }
};

inline Matrix mul(const Ring& R, const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows)
        throw ShapeError("matrix product: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) + " times " +
                         std::to_string(b.rows) + "x" + std::to_string(b.cols));
    Matrix m(a.rows, b.cols);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const Elem x = a(r, k);
            if (x == 0) continue;
            for (std::size_t c = 0; c < b.cols; ++c) m(r, c) = R.add(m(r, c), R.mul(x, b(k, c)));
        }
    return m;
}

inline Matrix add(const Ring& R, const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("matrix sum: shapes differ");
    Matrix m(a.rows, a.cols);
    for (std::size_t k = 0; k < a.data.size(); ++k) m.data[k] = R.add(a.data[k], b.data[k]);
    return m;
}

inline Matrix sub(const Ring& R, const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw ShapeError("matrix difference: shapes differ");
    Matrix m(a.rows, a.cols);
    for (std::size_t k = 0; k < a.data.size(); ++k) m.data[k] = R.sub(a.data[k], b.data[k]);
    return m;
}

/// Aᵀ G A
inline Matrix congruence(const Ring& R, const Matrix& a, const Matrix& g) { return mul(R, mul(R, a.transpose(), g), a); }

inline Elem dot(const Ring& R, const std::vector<Elem>& x, const Matrix& g, const std::vector<Elem>& y) {
    Elem s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0) continue;
        Elem t = 0;
        for (std::size_t j = 0; j < y.size(); ++j)
            if (y[j] != 0) t = R.add(t, R.mul(g(i, j), y[j]));
        s = R.add(s, R.mul(x[i], t));
    }
    return s;
}

// -- per-factor projection ---------------------------------------------------

inline Matrix project(const Ring& R, const Matrix& a, std::size_t i) {
    Matrix m(a.rows, a.cols);
    for (std::size_t k = 0; k < a.data.size(); ++k) m.data[k] = R.part(a.data[k], i);
    return m;
}

/// Inverse of project over all factors.
inline Matrix lift(const Ring& R, const std::vector<Matrix>& parts) {
    if (parts.size() != R.num_factors()) throw InternalError("lift: one matrix per factor required");
    Matrix m(parts[0].rows, parts[0].cols);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (parts[i].rows != m.rows || parts[i].cols != m.cols) throw InternalError("lift: shape mismatch");
        const Elem stride = R.factor(i).stride;
        for (std::size_t k = 0; k < m.data.size(); ++k) m.data[k] += parts[i].data[k] * stride;
    }
    return m;
}

// -- local (single factor) linear algebra ------------------------------------

namespace local {

inline Matrix mul(const Ring& R, std::size_t f, const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ShapeError("local matrix product: shape mismatch");
    Matrix m(a.rows, b.cols);
    for (std::size_t r = 0; r < a.rows; ++r)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const Elem x = a(r, k);
            if (x == 0) continue;
            for (std::size_t c = 0; c < b.cols; ++c) m(r, c) = R.local_add(f, m(r, c), R.local_mul(f, x, b(k, c)));
        }
    return m;
}

/// Determinant by elimination with a minimal-valuation pivot.
inline Elem det(const Ring& R, std::size_t f, Matrix a) {
    if (!a.is_square()) throw ShapeError("determinant of a non-square matrix");
    const std::size_t n = a.rows;
    Elem d = 1;
    bool negate = false;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pr = k, pc = k;
        std::uint32_t best = R.local_valuation(f, a(k, k));
        for (std::size_t r = k; r < n && best > 0; ++r)
            for (std::size_t c = k; c < n; ++c) {
                const std::uint32_t v = R.local_valuation(f, a(r, c));
                if (v < best) {
                    best = v;
                    pr = r;
                    pc = c;
                    if (v == 0) break;
                }
            }
        if (a(pr, pc) == 0) return 0;
        if (pr != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(pr, c), a(k, c));
            negate = !negate;
        }
        if (pc != k) {
            for (std::size_t r = 0; r < n; ++r) std::swap(a(r, pc), a(r, k));
            negate = !negate;
        }
        const Elem piv = a(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            if (a(r, k) == 0) continue;
            const Elem m = R.local_neg(f, R.local_divide(f, a(r, k), piv));
            for (std::size_t c = k; c < n; ++c) a(r, c) = R.local_add(f, a(r, c), R.local_mul(f, m, a(k, c)));
        }
        d = R.local_mul(f, d, piv);
    }
    return negate ? R.local_neg(f, d) : d;
}

struct RowEchelon {
    Matrix reduced;                  // unit-pivot reduced row echelon form
    std::vector<std::size_t> pivots;  // pivot column per nonzero row
    Matrix transform;                // left transform: transform * input = reduced
};

/// Gauss-Jordan elimination using only unit pivots, scanning columns left to
/// right. Pivot rows are normalized to 1 and cleared above and below. Columns
/// with no unit among the remaining rows are skipped; when the matrix is not
/// of "unit type" the remaining rows may still hold non-unit entries.
inline RowEchelon unit_rref(const Ring& R, std::size_t f, Matrix a) {
    const std::size_t n = a.rows, m = a.cols;
    Matrix t(n, n);
    for (std::size_t i = 0; i < n; ++i) t(i, i) = 1;
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t c = 0; c < m && row < n; ++c) {
        std::size_t pr = n;
        for (std::size_t r = row; r < n; ++r)
            if (R.local_is_unit(f, a(r, c))) {
                pr = r;
                break;
            }
        if (pr == n) continue;
        if (pr != row) {
            for (std::size_t k = 0; k < m; ++k) std::swap(a(pr, k), a(row, k));
            for (std::size_t k = 0; k < n; ++k) std::swap(t(pr, k), t(row, k));
        }
        const Elem inv = R.local_inv(f, a(row, c));
        for (std::size_t k = 0; k < m; ++k) a(row, k) = R.local_mul(f, a(row, k), inv);
        for (std::size_t k = 0; k < n; ++k) t(row, k) = R.local_mul(f, t(row, k), inv);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == row || a(r, c) == 0) continue;
            const Elem s = R.local_neg(f, a(r, c));
            for (std::size_t k = 0; k < m; ++k) a(r, k) = R.local_add(f, a(r, k), R.local_mul(f, s, a(row, k)));
            for (std::size_t k = 0; k < n; ++k) t(r, k) = R.local_add(f, t(r, k), R.local_mul(f, s, t(row, k)));
        }
        pivots.push_back(c);
        ++row;
    }
    return {std::move(a), std::move(pivots), std::move(t)};
}

/// Inverse of a square local matrix, or throws DomainError.
inline Matrix inverse(const Ring& R, std::size_t f, const Matrix& a) {
    if (!a.is_square()) throw ShapeError("inverse of a non-square matrix");
    auto e = unit_rref(R, f, a);
    if (e.pivots.size() != a.rows) throw DomainError("matrix is not invertible in factor " + std::to_string(f + 1));
    return e.transform;
}

/// True when the rows of a (n x m) generate R_f^m's image, i.e. a: R^m -> R^n is onto.
inline bool is_surjective(const Ring& R, std::size_t f, const Matrix& a) { return unit_rref(R, f, a).pivots.size() == a.rows; }

/// Basis (as columns of an m x (m-n) matrix) of ker a for a surjective a: R^m -> R^n.
inline Matrix kernel_of_surjection(const Ring& R, std::size_t f, const Matrix& a) {
    auto e = unit_rref(R, f, a);
    if (e.pivots.size() != a.rows) throw DomainError("kernel: map is not surjective in factor " + std::to_string(f + 1));
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0, p = 0; c < a.cols; ++c) {
        if (p < e.pivots.size() && e.pivots[p] == c)
            ++p;
        else
            free_cols.push_back(c);
    }
    Matrix k(a.cols, free_cols.size());
    for (std::size_t j = 0; j < free_cols.size(); ++j) {
        k(free_cols[j], j) = 1;
        for (std::size_t r = 0; r < e.pivots.size(); ++r) k(e.pivots[r], j) = R.local_neg(f, e.reduced(r, free_cols[j]));
    }
    return k;
}

}  // namespace local

// -- global wrappers ---------------------------------------------------------

inline Elem det(const Ring& R, const Matrix& a) {
    if (!a.is_square()) throw ShapeError("determinant of a non-square matrix");
    if (a.rows == 0) return R.one();
    std::vector<Elem> parts(R.num_factors());
    for (std::size_t i = 0; i < R.num_factors(); ++i) parts[i] = local::det(R, i, project(R, a, i));
    return R.from_parts(parts);
}

inline Matrix inverse(const Ring& R, const Matrix& a) {
    std::vector<Matrix> parts;
    for (std::size_t i = 0; i < R.num_factors(); ++i) parts.push_back(local::inverse(R, i, project(R, a, i)));
    return lift(R, parts);
}

inline bool is_invertible(const Ring& R, const Matrix& a) { return a.is_square() && R.is_unit(det(R, a)); }

inline bool is_surjective(const Ring& R, const Matrix& a) {
    for (std::size_t i = 0; i < R.num_factors(); ++i)
        if (!local::is_surjective(R, i, project(R, a, i))) return false;
    return true;
}

/// Kernel basis of a surjective a: R^m -> R^n; free of rank m - n.
inline Matrix kernel_of_surjection(const Ring& R, const Matrix& a) {
    std::vector<Matrix> parts;
    for (std::size_t i = 0; i < R.num_factors(); ++i) parts.push_back(local::kernel_of_surjection(R, i, project(R, a, i)));
    return lift(R, parts);
}

inline std::string to_string(const Ring& R, const Matrix& a) {
    std::string s = "[";
    for (std::size_t r = 0; r < a.rows; ++r) {
        if (r) s += ",";
        s += "[";
        for (std::size_t c = 0; c < a.cols; ++c) {
            if (c) s += ",";
            s += R.to_string(a(r, c));
        }
        s += "]";
    }
    return s + "]";
}

}  // namespace orthstab
