#pragma once

// Column- and row-adapted maps, the factorization of a surjection as
// (invertible) * (column-adapted), its transpose for isometries, and the
// row-insertion map between row-adapted isometries.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "form.hpp"
#include "isometry.hpp"
#include "matrix.hpp"
#include "ring.hpp"

namespace orthstab {

/// Pivot columns (0-based, increasing) per local factor.
struct AdaptedProfile {
    std::vector<std::vector<std::size_t>> pivots;

    friend bool operator==(const AdaptedProfile&, const AdaptedProfile&) = default;
    /// Pivots of a single-factor ring, or when every factor agrees.
    const std::vector<std::size_t>& common() const {
        for (const auto& p : pivots)
            if (p != pivots.front()) throw UsageError("pivot sets differ between factors");
        return pivots.front();
    }
};

namespace local {

inline std::optional<std::vector<std::size_t>> column_adapted_pivots(const Ring& R, std::size_t f, const Matrix& m) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < m.rows; ++i) {
        std::size_t j = 0;
        while (j < m.cols && !R.local_is_unit(f, m(i, j))) ++j;
        if (j == m.cols) return std::nullopt;
        if (!s.empty() && j <= s.back()) return std::nullopt;
        for (std::size_t r = 0; r < m.rows; ++r)
            if (m(r, j) != (r == i ? 1u : 0u)) return std::nullopt;
        s.push_back(j);
    }
    return s;
}

}  // namespace local

inline std::optional<AdaptedProfile> is_column_adapted(const Ring& R, const Matrix& m) {
    AdaptedProfile p;
    for (std::size_t f = 0; f < R.num_factors(); ++f) {
        auto s = local::column_adapted_pivots(R, f, project(R, m, f));
        if (!s) return std::nullopt;
        p.pivots.push_back(std::move(*s));
    }
    return p;
}

/// S_r(m) = S_c(mᵀ).
inline std::optional<AdaptedProfile> is_row_adapted(const Ring& R, const Matrix& m) { return is_column_adapted(R, m.transpose()); }

inline AdaptedProfile row_profile(const Ring& R, const Matrix& m) {
    auto p = is_row_adapted(R, m);
    if (!p) throw DomainError("matrix is not row-adapted");
    return *p;
}

struct SurjectionFactorization {
    Matrix f1;  // column-adapted, n x m
    Matrix f2;  // invertible, n x n
    AdaptedProfile profile;
};

/// f = f2 f1 for a surjection f: R^m -> R^n (n x m matrix). Pivots are the
/// first columns that are independent modulo the maximal ideal.
inline SurjectionFactorization factor_surjection(const Ring& R, const Matrix& f) {
    std::vector<Matrix> f1s, f2s;
    AdaptedProfile prof;
    for (std::size_t i = 0; i < R.num_factors(); ++i) {
        const Matrix fi = project(R, f, i);
        auto e = local::unit_rref(R, i, fi);
        if (e.pivots.size() != f.rows) throw DomainError("map is not surjective in factor " + std::to_string(i + 1));
        Matrix f2 = fi.select_columns(e.pivots);
        Matrix f1 = local::mul(R, i, local::inverse(R, i, f2), fi);
        f1s.push_back(std::move(f1));
        f2s.push_back(std::move(f2));
        prof.pivots.push_back(std::move(e.pivots));
    }
    SurjectionFactorization out{lift(R, f1s), lift(R, f2s), std::move(prof)};
    if (!(mul(R, out.f2, out.f1) == f)) throw InternalError("factor_surjection: f2 f1 != f");
    auto check = is_column_adapted(R, out.f1);
    if (!check || !(*check == out.profile)) throw InternalError("factor_surjection: f1 not column-adapted on the pivots");
    return out;
}

/// Product of two column-adapted maps, checked to be column-adapted.
inline Matrix compose_adapted(const Ring& R, const Matrix& a, const Matrix& b) {
    if (!is_column_adapted(R, a) || !is_column_adapted(R, b)) throw DomainError("compose_adapted: inputs must be column-adapted");
    Matrix c = mul(R, a, b);
    if (!is_column_adapted(R, c)) throw PropertyViolation("composition of column-adapted maps is not column-adapted");
    return c;
}

inline Matrix compose_row_adapted(const Ring& R, const Matrix& a, const Matrix& b) {
    return compose_adapted(R, b.transpose(), a.transpose()).transpose();
}

struct IsometryFactorization {
    Matrix f1;       // row-adapted isometry (R^n, beta) -> (R^n', B')
    Matrix f2;       // invertible isometry (R^n, B) -> (R^n, beta)
    OrthForm beta;
    AdaptedProfile profile;  // S_r(f1)
};

/// f = f1 f2 with f1 row-adapted, by factoring the surjection fᵀ.
inline IsometryFactorization factor_isometry(const OrthForm& src, const OrthForm& tgt, const Matrix& f) {
    const Ring& R = *src.ring;
    if (!is_isometry(f, src, tgt)) throw DomainError("factor_isometry: input is not an isometry");
    auto s = factor_surjection(R, f.transpose());
    Matrix f1 = s.f1.transpose(), f2 = s.f2.transpose();
    const Matrix f2inv = inverse(R, f2);
    Matrix beta = congruence(R, f2inv, src.gram);
    if (!(congruence(R, f1, tgt.gram) == beta)) throw InternalError("factor_isometry: f1ᵀ B' f1 != beta");
    return {std::move(f1), std::move(f2), OrthForm::validate(src.ring, std::move(beta)), std::move(s.profile)};
}

// -- deletion relation and insertion map -------------------------------------

namespace local {

/// Rows of g (0-based) to delete so that the rest equals f, never deleting a
/// pivot row of g. Matching is preferred over deletion at every step.
inline std::optional<std::vector<std::size_t>> find_deletion(const Matrix& f, const Matrix& g, const std::vector<std::size_t>& g_pivots) {
    if (f.cols != g.cols || f.rows > g.rows) return std::nullopt;
    const std::size_t n = f.rows, np = g.rows;
    std::vector<char> pivot(np, 0);
    for (auto s : g_pivots) pivot[s] = 1;
    // ok[i][j]: f rows i.. can be realized from g rows j..
    std::vector<std::vector<char>> ok(n + 1, std::vector<char>(np + 1, 0));
    auto same_row = [&](std::size_t i, std::size_t j) {
        for (std::size_t c = 0; c < f.cols; ++c)
            if (f(i, c) != g(j, c)) return false;
        return true;
    };
    ok[n][np] = 1;
    for (std::size_t j = np; j-- > 0;) ok[n][j] = ok[n][j + 1] && !pivot[j];
    for (std::size_t i = n; i-- > 0;)
        for (std::size_t j = np; j-- > 0;)
            ok[i][j] = (same_row(i, j) && ok[i + 1][j + 1]) || (!pivot[j] && ok[i][j + 1]);
    if (!ok[0][0]) return std::nullopt;
    std::vector<std::size_t> del;
    std::size_t i = 0;
    for (std::size_t j = 0; j < np; ++j) {
        if (i < n && same_row(i, j) && ok[i + 1][j + 1])
            ++i;
        else
            del.push_back(j);
    }
    return del;
}

}  // namespace local

/// Per-factor deletion sets realizing f from g, or nullopt.
inline std::optional<std::vector<std::vector<std::size_t>>> find_deletion(const Ring& R, const Matrix& f, const Matrix& g) {
    auto pg = is_row_adapted(R, g);
    if (!pg || !is_row_adapted(R, f)) throw DomainError("deletion relation needs row-adapted maps");
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < R.num_factors(); ++i) {
        auto d = local::find_deletion(project(R, f, i), project(R, g, i), pg->pivots[i]);
        if (!d) return std::nullopt;
        out.push_back(std::move(*d));
    }
    return out;
}

/// phi (n' x n): identity rows off the deletion set; at a deleted position i
/// the row r_i of g spread onto the columns S_r(f). Computed per factor.
inline Matrix insertion_map(const Ring& R, const Matrix& f, const Matrix& g) {
    auto del = find_deletion(R, f, g);
    if (!del) throw DomainError("insertion_map: f is not obtained from g by deleting non-pivot rows");
    const auto pf = row_profile(R, f);
    const std::size_t n = f.rows, np = g.rows;
    std::vector<Matrix> parts;
    for (std::size_t i = 0; i < R.num_factors(); ++i) {
        const Matrix gi = project(R, g, i);
        Matrix phi(np, n);
        std::vector<char> deleted(np, 0);
        for (auto j : (*del)[i]) deleted[j] = 1;
        for (std::size_t j = 0, k = 0; j < np; ++j) {
            if (!deleted[j]) {
                phi(j, k++) = 1;
                continue;
            }
            for (std::size_t c = 0; c < pf.pivots[i].size(); ++c) phi(j, pf.pivots[i][c]) = gi(j, c);
        }
        parts.push_back(std::move(phi));
    }
    Matrix phi = lift(R, parts);
    if (!(mul(R, phi, f) == g)) throw InternalError("insertion_map: phi f != g");
    return phi;
}

}  // namespace orthstab
