#pragma once

// Nondegenerate symmetric bilinear forms: validation, diagonalization,
// canonical forms diag(1, ..., 1, x_I), direct sums and complements.

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "matrix.hpp"
#include "ring.hpp"

namespace orthstab {

/// Isometry class: rank plus the set of factors where det is a nonsquare.
struct ClassLabel {
    std::size_t rank = 0;
    FactorMask nonsquare = 0;

    friend bool operator==(const ClassLabel&, const ClassLabel&) = default;
    friend auto operator<=>(const ClassLabel&, const ClassLabel&) = default;

    /// 1-based factor indices, ascending.
    std::vector<std::size_t> nonsquare_list() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < 32; ++i)
            if ((nonsquare >> i) & 1u) out.push_back(i + 1);
        return out;
    }
    std::string to_string() const {
        std::string s = "(" + std::to_string(rank) + ",{";
        bool first = true;
        for (auto i : nonsquare_list()) {
            if (!first) s += ",";
            s += std::to_string(i);
            first = false;
        }
        return s + "})";
    }
};

struct OrthForm {
    RingPtr ring;
    Matrix gram;
    ClassLabel label;

    std::size_t rank() const { return gram.rows; }

    /// Checks symmetry and that det is a unit in every factor.
    static OrthForm validate(RingPtr ring, Matrix gram) {
        if (!gram.is_square()) throw ShapeError("Gram matrix is not square");
        if (!gram.is_symmetric()) throw ShapeError("Gram matrix is not symmetric");
        for (auto e : gram.data)
            if (e >= ring->size()) throw UsageError("Gram entry out of range");
        const Elem d = det(*ring, gram);
        if (auto bad = ring->nonunit_factor(d))
            throw DegeneracyError("form is degenerate: det = " + ring->to_string(d) + " is not a unit in factor " +
                                  std::to_string(*bad + 1));
        OrthForm f{std::move(ring), std::move(gram), {}};
        f.label = {f.gram.rows, f.gram.rows ? f.ring->square_class(d) : 0};
        return f;
    }

    /// The skeleton representative diag(1, ..., 1, x_I).
    static OrthForm standard(RingPtr ring, ClassLabel label) {
        if (label.rank == 0 && label.nonsquare != 0) throw DomainError("rank-0 form has empty nonsquare set");
        if (label.nonsquare & ~ring->all_factors()) throw UsageError("nonsquare set refers to a missing factor");
        Matrix g = Matrix::identity(*ring, label.rank);
        if (label.rank) g(label.rank - 1, label.rank - 1) = ring->nonsquare_unit(label.nonsquare);
        return OrthForm{std::move(ring), std::move(g), label};
    }

    static OrthForm identity(RingPtr ring, std::size_t n) { return standard(std::move(ring), {n, 0}); }
};

inline void require_same_ring(const Ring& a, const Ring& b) {
    if (&a != &b && !(a == b)) throw UsageError("ring mismatch");
}

struct Diagonalization {
    Matrix P;  // invertible
    Matrix D;  // diagonal, unit entries; Pᵀ G P = D
};

namespace local {

/// In-place congruence step: v_j <- v_j + s v_k on basis P and Gram G.
inline void add_basis_multiple(const Ring& R, std::size_t f, Matrix& G, Matrix& P, std::size_t j, std::size_t k, Elem s) {
    const std::size_t n = G.rows;
    for (std::size_t r = 0; r < P.rows; ++r) P(r, j) = R.local_add(f, P(r, j), R.local_mul(f, s, P(r, k)));
    for (std::size_t r = 0; r < n; ++r) G(r, j) = R.local_add(f, G(r, j), R.local_mul(f, s, G(r, k)));
    for (std::size_t c = 0; c < n; ++c) G(j, c) = R.local_add(f, G(j, c), R.local_mul(f, s, G(k, c)));
}

inline void swap_basis(Matrix& G, Matrix& P, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t r = 0; r < P.rows; ++r) std::swap(P(r, a), P(r, b));
    for (std::size_t r = 0; r < G.rows; ++r) std::swap(G(r, a), G(r, b));
    for (std::size_t c = 0; c < G.cols; ++c) std::swap(G(a, c), G(b, c));
}

inline void scale_basis(const Ring& R, std::size_t f, Matrix& G, Matrix& P, std::size_t j, Elem s) {
    for (std::size_t r = 0; r < P.rows; ++r) P(r, j) = R.local_mul(f, P(r, j), s);
    for (std::size_t r = 0; r < G.rows; ++r) G(r, j) = R.local_mul(f, G(r, j), s);
    for (std::size_t c = 0; c < G.cols; ++c) G(j, c) = R.local_mul(f, G(j, c), s);
}

/// Diagonalize a nondegenerate local Gram matrix in place; P accumulates the basis change.
inline void diagonalize(const Ring& R, std::size_t f, Matrix& G, Matrix& P) {
    const std::size_t n = G.rows;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = n;
        for (std::size_t i = k; i < n; ++i)
            if (R.local_is_unit(f, G(i, i))) {
                piv = i;
                break;
            }
        if (piv == n) {
            // no unit on the diagonal: v_i <- v_i + v_j for the first unit off-diagonal entry
            for (std::size_t i = k; i < n && piv == n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (R.local_is_unit(f, G(i, j))) {
                        add_basis_multiple(R, f, G, P, i, j, 1);
                        piv = i;
                        break;
                    }
            if (piv == n) throw InternalError("diagonalize: no unit pivot (form degenerate?)");
        }
        swap_basis(G, P, k, piv);
        const Elem inv = R.local_inv(f, G(k, k));
        for (std::size_t j = k + 1; j < n; ++j) {
            if (G(k, j) == 0) continue;
            add_basis_multiple(R, f, G, P, j, k, R.local_neg(f, R.local_mul(f, G(k, j), inv)));
        }
    }
}

}  // namespace local

inline Diagonalization diagonalize(const OrthForm& form) {
    const Ring& R = *form.ring;
    std::vector<Matrix> Ps, Ds;
    for (std::size_t f = 0; f < R.num_factors(); ++f) {
        Matrix G = project(R, form.gram, f);
        Matrix P(G.rows, G.rows);
        for (std::size_t i = 0; i < G.rows; ++i) P(i, i) = 1;
        local::diagonalize(R, f, G, P);
        Ps.push_back(std::move(P));
        Ds.push_back(std::move(G));
    }
    if (form.rank() == 0) return {Matrix(), Matrix()};
    return {lift(R, Ps), lift(R, Ds)};
}

struct CanonicalForm {
    ClassLabel label;
    Matrix T;  // Tᵀ G T = standard(label).gram
};

namespace local {

/// Smallest (u1, u2) in code order with x (u1^2 + u2^2) = 1 in factor f.
inline std::pair<Elem, Elem> pair_merge_rotation(const Ring& R, std::size_t f, Elem x) {
    const Elem q = R.factor(f).size;
    const Elem target = R.local_inv(f, x);
    for (Elem u1 = 0; u1 < q; ++u1) {
        const Elem s1 = R.local_mul(f, u1, u1);
        for (Elem u2 = 0; u2 < q; ++u2)
            if (R.local_add(f, s1, R.local_mul(f, u2, u2)) == target) return {u1, u2};
    }
    throw InternalError("no rank-2 rotation merging two nonsquares");
}

/// Canonical transform of a local Gram matrix; returns T and whether x_f remains.
inline std::pair<Matrix, bool> canonical_transform(const Ring& R, std::size_t f, Matrix G) {
    const std::size_t n = G.rows;
    Matrix P(n, n);
    for (std::size_t i = 0; i < n; ++i) P(i, i) = 1;
    diagonalize(R, f, G, P);
    const auto& Rf = *R.factor_ring(f);
    const Elem x = R.canonical_nonsquare(f);
    const Elem xinv = R.local_inv(f, x);
    std::vector<std::size_t> xs;
    for (std::size_t i = 0; i < n; ++i) {
        const Elem d = G(i, i);
        const bool square = R.residue_is_square(f, R.factor(f).spec.kind == LocalKind::zpk ? d % R.factor(f).spec.p : d);
        const Elem target = square ? d : R.local_mul(f, d, xinv);
        const auto s = Rf.sqrt_unit(target);
        if (!s) throw InternalError("canonical_form: expected a square");
        scale_basis(R, f, G, P, i, R.local_inv(f, *s));
        if (!square) xs.push_back(i);
    }
    if (xs.size() >= 2) {
        const auto [u1, u2] = pair_merge_rotation(R, f, x);
        for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
            const std::size_t a = xs[k], b = xs[k + 1];
            for (std::size_t r = 0; r < n; ++r) {
                const Elem pa = P(r, a), pb = P(r, b);
                P(r, a) = R.local_add(f, R.local_mul(f, u1, pa), R.local_mul(f, u2, pb));
                P(r, b) = R.local_add(f, R.local_mul(f, R.local_neg(f, u2), pa), R.local_mul(f, u1, pb));
            }
        }
    }
    const bool odd = xs.size() % 2 == 1;
    if (odd) {
        // move the surviving x to the last slot (cyclic shift keeps the others in order)
        const std::size_t p = xs.back();
        for (std::size_t j = p; j + 1 < n; ++j)
            for (std::size_t r = 0; r < n; ++r) std::swap(P(r, j), P(r, j + 1));
    }
    return {std::move(P), odd};
}

}  // namespace local

inline CanonicalForm canonical_form(const OrthForm& form) {
    const Ring& R = *form.ring;
    if (form.rank() == 0) return {{0, 0}, Matrix()};
    std::vector<Matrix> Ts;
    FactorMask mask = 0;
    for (std::size_t f = 0; f < R.num_factors(); ++f) {
        auto [T, odd] = local::canonical_transform(R, f, project(R, form.gram, f));
        if (odd) mask |= FactorMask{1} << f;
        Ts.push_back(std::move(T));
    }
    CanonicalForm out{{form.rank(), mask}, lift(R, Ts)};
    if (out.label != form.label) throw InternalError("canonical_form: label disagrees with det square class");
    return out;
}

inline bool is_isometric(const OrthForm& a, const OrthForm& b) {
    require_same_ring(*a.ring, *b.ring);
    return a.label == b.label;
}

inline OrthForm direct_sum(const OrthForm& a, const OrthForm& b) {
    require_same_ring(*a.ring, *b.ring);
    return OrthForm{a.ring, Matrix::block_diag(a.gram, b.gram), {a.rank() + b.rank(), a.label.nonsquare ^ b.label.nonsquare}};
}

struct Complement {
    OrthForm form;     // restricted Gram on the complement basis
    Matrix embedding;  // n x (n-d), columns span the orthogonal complement
};

/// Orthogonal complement of the image of `basis` (n x d columns spanning a
/// nondegenerate subspace of W).
inline Complement orthogonal_complement(const OrthForm& W, const Matrix& basis) {
    const Ring& R = *W.ring;
    if (basis.rows != W.rank()) throw ShapeError("complement: basis vectors have wrong length");
    const Matrix A = mul(R, basis.transpose(), W.gram);
    if (!is_invertible(R, mul(R, A, basis))) throw InternalError("complement: image is not nondegenerate");
    Matrix K = kernel_of_surjection(R, A);
    if (!is_invertible(R, Matrix::hconcat(basis, K))) throw InternalError("complement: image and complement do not span");
    Matrix C = congruence(R, K, W.gram);
    try {
        return {OrthForm::validate(W.ring, std::move(C)), std::move(K)};
    } catch (const DegeneracyError& e) {
        throw InternalError(std::string("complement is degenerate: ") + e.what());
    }
}

}  // namespace orthstab
