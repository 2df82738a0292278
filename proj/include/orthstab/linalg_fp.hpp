#pragma once

// Exact linear algebra over prime fields Z/l: incremental echelon bases in
// dense, bit-packed (l = 2) and sparse flavours, plus rref and kernels.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "ring.hpp"

namespace orthstab::fp {

using Scalar = std::uint32_t;

struct Field {
    Scalar p = 2;
    std::vector<Scalar> inverse_;

    static Field make(std::uint64_t ell) {
        if (ell < 2 || ell > 65521 || !detail::is_prime(ell)) throw UsageError("coefficient field needs a prime l < 65536, got " + std::to_string(ell));
        Field f;
        f.p = static_cast<Scalar>(ell);
        f.inverse_.assign(f.p, 0);
        for (Scalar a = 1; a < f.p; ++a) f.inverse_[a] = static_cast<Scalar>(detail::inv_mod(a, f.p));
        return f;
    }
    Scalar add(Scalar a, Scalar b) const {
        const Scalar s = a + b;
        return s >= p ? s - p : s;
    }
    Scalar sub(Scalar a, Scalar b) const { return a >= b ? a - b : a + p - b; }
    Scalar neg(Scalar a) const { return a ? p - a : 0; }
    Scalar mul(Scalar a, Scalar b) const { return static_cast<Scalar>(static_cast<std::uint64_t>(a) * b % p); }
    Scalar inv(Scalar a) const {
        if (a == 0) throw DomainError("division by zero in Z/" + std::to_string(p));
        return inverse_[a];
    }
    Scalar from_int(std::int64_t n) const {
        std::int64_t r = n % static_cast<std::int64_t>(p);
        return static_cast<Scalar>(r < 0 ? r + p : r);
    }
};

using Dense = std::vector<Scalar>;
/// Sorted by index, no zero values.
using Sparse = std::vector<std::pair<std::uint32_t, Scalar>>;

inline Dense to_dense(const Sparse& s, std::size_t dim) {
    Dense d(dim, 0);
    for (auto [i, v] : s) d[i] = v;
    return d;
}

inline Sparse to_sparse(const Dense& d) {
    Sparse s;
    for (std::uint32_t i = 0; i < d.size(); ++i)
        if (d[i]) s.emplace_back(i, d[i]);
    return s;
}

/// Accumulates entries (index, value) into a canonical sparse vector.
inline Sparse normalize(const Field& F, std::vector<std::pair<std::uint32_t, Scalar>> terms) {
    std::sort(terms.begin(), terms.end(), [](auto& a, auto& b) { return a.first < b.first; });
    Sparse out;
    for (auto [i, v] : terms) {
        if (!out.empty() && out.back().first == i)
            out.back().second = F.add(out.back().second, v);
        else
            out.emplace_back(i, v);
        if (!out.empty() && out.back().second == 0) out.pop_back();
    }
    return out;
}

/// Row-echelon basis of a subspace of F^dim; rows are monic at their pivot and
/// zero before it. Optional tags track linear combinations of inserted vectors.
class DenseEchelon {
public:
    DenseEchelon(const Field& F, std::size_t dim, std::size_t tag_dim = 0) : F_(F), dim_(dim), tag_dim_(tag_dim), row_of_(dim, -1) {}

    std::size_t dim() const { return dim_; }
    std::size_t rank() const { return rows_.size(); }
    const std::vector<std::size_t>& pivots() const { return pivots_; }

    /// Reduces v (and its tag) in place against the basis.
    void reduce(Dense& v, Dense* tag = nullptr) const {
        for (std::size_t c = 0; c < dim_; ++c) {
            if (v[c] == 0 || row_of_[c] < 0) continue;
            const auto r = static_cast<std::size_t>(row_of_[c]);
            const Scalar s = F_.neg(v[c]);
            const Dense& row = rows_[r];
            for (std::size_t k = c; k < dim_; ++k)
                if (row[k]) v[k] = F_.add(v[k], F_.mul(s, row[k]));
            if (tag && tag_dim_)
                for (std::size_t k = 0; k < tag_dim_; ++k)
                    if (tags_[r][k]) (*tag)[k] = F_.add((*tag)[k], F_.mul(s, tags_[r][k]));
        }
    }

    /// Returns true when v was independent (and is now part of the basis).
    bool insert(Dense v, Dense tag = {}) {
        if (v.size() != dim_) throw InternalError("echelon insert: dimension mismatch");
        if (tag_dim_ && tag.size() != tag_dim_) tag.assign(tag_dim_, 0);
        reduce(v, tag_dim_ ? &tag : nullptr);
        std::size_t c = 0;
        while (c < dim_ && v[c] == 0) ++c;
        if (c == dim_) {
            last_residual_tag_ = std::move(tag);
            return false;
        }
        const Scalar inv = F_.inv(v[c]);
        for (std::size_t k = c; k < dim_; ++k) v[k] = F_.mul(v[k], inv);
        for (auto& t : tag) t = F_.mul(t, inv);
        row_of_[c] = static_cast<std::ptrdiff_t>(rows_.size());
        rows_.push_back(std::move(v));
        tags_.push_back(std::move(tag));
        pivots_.push_back(c);
        return true;
    }
    bool insert(const Sparse& s) { return insert(to_dense(s, dim_)); }

    bool contains(Dense v) const {
        reduce(v);
        return std::all_of(v.begin(), v.end(), [](Scalar x) { return x == 0; });
    }
    /// Tag of the last dependent insertion after full reduction (a relation).
    const Dense& last_residual_tag() const { return last_residual_tag_; }

private:
    const Field& F_;
    std::size_t dim_, tag_dim_;
    std::vector<std::ptrdiff_t> row_of_;
    std::vector<Dense> rows_, tags_;
    std::vector<std::size_t> pivots_;
    Dense last_residual_tag_;
};

/// Echelon basis over Z/2 with bit-packed rows; pivot = lowest set bit.
class BitEchelon {
public:
    explicit BitEchelon(std::size_t dim) : dim_(dim), words_((dim + 63) / 64), row_of_(dim, -1) {}

    std::size_t rank() const { return rows_.size(); }
    std::size_t words() const { return words_; }

    bool insert(std::vector<std::uint64_t> v) {
        for (std::size_t w = 0; w < words_; ++w) {
            while (v[w]) {
                const std::size_t bit = w * 64 + static_cast<std::size_t>(std::countr_zero(v[w]));
                const auto r = row_of_[bit];
                if (r < 0) {
                    row_of_[bit] = static_cast<std::ptrdiff_t>(rows_.size());
                    rows_.push_back(std::move(v));
                    return true;
                }
                const auto& row = rows_[static_cast<std::size_t>(r)];
                for (std::size_t k = w; k < words_; ++k) v[k] ^= row[k];
            }
        }
        return false;
    }
    bool insert_sparse(const Sparse& s) {
        std::vector<std::uint64_t> v(words_, 0);
        for (auto [i, x] : s)
            if (x & 1u) v[i / 64] ^= std::uint64_t{1} << (i % 64);
        return insert(std::move(v));
    }

private:
    std::size_t dim_, words_;
    std::vector<std::ptrdiff_t> row_of_;
    std::vector<std::vector<std::uint64_t>> rows_;
};

/// Sparse leading-term elimination; rows are monic at their first entry.
class SparseEchelon {
public:
    explicit SparseEchelon(const Field& F) : F_(F) {}

    std::size_t rank() const { return rows_.size(); }

    /// Reduces v in a dense scratch row, so each step costs the length of the
    /// pivot row rather than of v.
    bool insert(const Sparse& v) {
        if (v.empty()) return false;
        std::uint32_t lo = v.front().first, hi = 0;
        for (const auto& [i, x] : v) lo = std::min(lo, i), hi = std::max(hi, i);
        grow(hi + 1);
        for (const auto& [i, x] : v) acc_[i] = F_.add(acc_[i], x);
        for (std::uint32_t c = lo; c <= hi; ++c) {
            const Scalar a = acc_[c];
            if (!a) continue;
            const std::int32_t r = row_at_[c];
            if (r < 0) {
                const Scalar inv = F_.inv(a);
                Sparse row;
                for (std::uint32_t j = c; j <= hi; ++j)
                    if (acc_[j]) row.emplace_back(j, F_.mul(acc_[j], inv)), acc_[j] = 0;
                row_at_[c] = static_cast<std::int32_t>(rows_.size());
                rows_.push_back(std::move(row));
                return true;
            }
            const Scalar s = F_.neg(a);
            for (const auto& [j, y] : rows_[r]) {
                acc_[j] = F_.add(acc_[j], F_.mul(s, y));
                hi = std::max(hi, j);
            }
        }
        return false;
    }

private:
    void grow(std::size_t n) {
        if (acc_.size() >= n) return;
        acc_.resize(n, 0);
        row_at_.resize(n, -1);
    }

    const Field& F_;
    std::vector<Sparse> rows_;
    std::vector<Scalar> acc_;
    std::vector<std::int32_t> row_at_;
};

/// Rank of a set of vectors via whichever echelon suits the field.
class RankCounter {
public:
    RankCounter(const Field& F, std::size_t dim, bool sparse = false) : F_(F), dim_(dim) {
        if (F.p == 2 && !sparse)
            bits_.emplace(dim);
        else if (sparse)
            sparse_.emplace(F);
        else
            dense_.emplace(F, dim);
    }
    bool insert(const Sparse& v) {
        if (bits_) return bits_->insert_sparse(v);
        if (sparse_) return sparse_->insert(v);
        return dense_->insert(v);
    }
    std::size_t rank() const { return bits_ ? bits_->rank() : sparse_ ? sparse_->rank() : dense_->rank(); }
    std::size_t dim() const { return dim_; }

private:
    const Field& F_;
    std::size_t dim_;
    std::optional<BitEchelon> bits_;
    std::optional<SparseEchelon> sparse_;
    std::optional<DenseEchelon> dense_;
};

struct Rref {
    std::vector<Dense> rows;           // nonzero rows, monic pivots, cleared above and below
    std::vector<std::size_t> pivots;   // pivot column per row
    std::vector<std::ptrdiff_t> row_of;  // column -> row or -1
};

/// Reduced row echelon form of the span of `vectors` in F^dim.
inline Rref rref(const Field& F, const std::vector<Dense>& vectors, std::size_t dim) {
    Rref out;
    out.row_of.assign(dim, -1);
    std::vector<Dense> basis;
    DenseEchelon tmp(F, dim);
    for (const auto& v : vectors) {
        Dense w = v;
        tmp.reduce(w);
        if (std::any_of(w.begin(), w.end(), [](Scalar x) { return x != 0; })) {
            tmp.insert(w);
            basis.push_back(std::move(w));
        }
    }
    // basis vectors are in echelon form up to ordering; normalize and back-substitute
    std::vector<std::pair<std::size_t, Dense>> byp;
    for (auto& b : basis) {
        std::size_t c = 0;
        while (b[c] == 0) ++c;
        const Scalar inv = F.inv(b[c]);
        for (auto& x : b) x = F.mul(x, inv);
        byp.emplace_back(c, std::move(b));
    }
    std::sort(byp.begin(), byp.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (std::size_t i = byp.size(); i-- > 0;) {
        for (std::size_t j = 0; j < i; ++j) {
            const Scalar s = byp[j].second[byp[i].first];
            if (!s) continue;
            const Scalar ns = F.neg(s);
            for (std::size_t k = 0; k < dim; ++k)
                if (byp[i].second[k]) byp[j].second[k] = F.add(byp[j].second[k], F.mul(ns, byp[i].second[k]));
        }
    }
    for (auto& [c, row] : byp) {
        out.row_of[c] = static_cast<std::ptrdiff_t>(out.rows.size());
        out.pivots.push_back(c);
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// Reduces v modulo the row space of r (fully reduced rows).
inline void reduce_mod(const Field& F, const Rref& r, Dense& v) {
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
        const Scalar s = v[r.pivots[i]];
        if (!s) continue;
        const Scalar ns = F.neg(s);
        const Dense& row = r.rows[i];
        for (std::size_t k = 0; k < v.size(); ++k)
            if (row[k]) v[k] = F.add(v[k], F.mul(ns, row[k]));
    }
}

/// Basis of {x : A x = 0} where A is given by its rows (each of length ncols).
inline std::vector<Dense> kernel(const Field& F, const std::vector<Dense>& rows, std::size_t ncols) {
    const Rref r = rref(F, rows, ncols);
    std::vector<Dense> out;
    for (std::size_t c = 0; c < ncols; ++c) {
        if (r.row_of[c] >= 0) continue;
        Dense x(ncols, 0);
        x[c] = 1;
        for (std::size_t i = 0; i < r.rows.size(); ++i) x[r.pivots[i]] = F.neg(r.rows[i][c]);
        out.push_back(std::move(x));
    }
    return out;
}

/// Rank of the matrix whose columns are `cols` (sparse) in F^dim.
inline std::size_t rank_of(const Field& F, const std::vector<Sparse>& cols, std::size_t dim) {
    RankCounter rc(F, dim);
    for (const auto& c : cols) rc.insert(c);
    return rc.rank();
}

}  // namespace orthstab::fp
