#pragma once

// The deletion partial order on row-adapted isometries (R^d, B) -> (R^n, I),
// its total extension, and the word map into (R^d + {bullet})*.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "adapted.hpp"
#include "error.hpp"
#include "form.hpp"
#include "isometry.hpp"

namespace orthstab {

/// Row-adapted isometry from (R^d, B) into the identity form of rank n.
struct MorphismKey {
    RingPtr ring;
    Matrix B;       // d x d
    Matrix matrix;  // n x d
    AdaptedProfile rows;  // S_r per factor

    static MorphismKey make(RingPtr ring, Matrix B, Matrix m) {
        if (m.cols != B.rows) throw ShapeError("key: matrix width must equal rank of B");
        auto p = is_row_adapted(*ring, m);
        if (!p) throw DomainError("key: matrix is not row-adapted");
        if (!(congruence(*ring, m, Matrix::identity(*ring, m.rows)) == B))
            throw DomainError("key: matrix is not an isometry into the identity form");
        return {std::move(ring), std::move(B), std::move(m), std::move(*p)};
    }

    std::size_t d() const { return matrix.cols; }
    std::size_t n() const { return matrix.rows; }
};

/// Letter: -1 for a pivot position, else the code of the row (lex order on R_i^d).
using Word = std::vector<std::int64_t>;

inline void require_same_hom(const MorphismKey& f, const MorphismKey& g) {
    require_same_ring(*f.ring, *g.ring);
    if (!(f.B == g.B)) throw UsageError("keys have different source forms");
}

/// One word per local factor.
inline std::vector<Word> word_embed(const MorphismKey& f) {
    const Ring& R = *f.ring;
    std::vector<Word> out;
    for (std::size_t i = 0; i < R.num_factors(); ++i) {
        const Matrix m = project(R, f.matrix, i);
        const std::int64_t q = R.factor(i).size;
        Word w(f.n());
        for (std::size_t r = 0; r < f.n(); ++r) {
            std::int64_t code = 0;
            for (std::size_t c = 0; c < f.d(); ++c) code = code * q + m(r, c);
            w[r] = code;
        }
        for (auto s : f.rows.pivots[i]) w[s] = -1;
        out.push_back(std::move(w));
    }
    return out;
}

/// w is a subsequence of v using every bullet of v.
inline bool word_subsequence(const Word& w, const Word& v) {
    std::vector<std::vector<char>> ok(w.size() + 1, std::vector<char>(v.size() + 1, 0));
    ok[w.size()][v.size()] = 1;
    for (std::size_t j = v.size(); j-- > 0;) ok[w.size()][j] = ok[w.size()][j + 1] && v[j] != -1;
    for (std::size_t i = w.size(); i-- > 0;)
        for (std::size_t j = v.size(); j-- > 0;) ok[i][j] = (w[i] == v[j] && ok[i + 1][j + 1]) || (v[j] != -1 && ok[i][j + 1]);
    return ok[0][0];
}

/// f can be obtained from g by deleting non-pivot rows (in every factor).
inline bool precedes(const MorphismKey& f, const MorphismKey& g) {
    require_same_hom(f, g);
    if (f.n() > g.n()) return false;
    return find_deletion(*f.ring, f.matrix, g.matrix).has_value();
}

/// The total order: target rank, then per factor (factor 0 first) the pivot
/// set and the word, both lexicographically with the bullet smallest.
inline std::strong_ordering total_compare(const MorphismKey& f, const MorphismKey& g) {
    require_same_hom(f, g);
    if (auto c = f.n() <=> g.n(); c != 0) return c;
    const auto wf = word_embed(f), wg = word_embed(g);
    for (std::size_t i = 0; i < wf.size(); ++i) {
        if (auto c = f.rows.pivots[i] <=> g.rows.pivots[i]; c != 0) return c;
        if (auto c = wf[i] <=> wg[i]; c != 0) return c;
    }
    return std::strong_ordering::equal;
}

inline bool total_less(const MorphismKey& f, const MorphismKey& g) { return total_compare(f, g) < 0; }

/// All keys (R^d, B) -> (R^n, I) in increasing total order.
inline std::vector<MorphismKey> enumerate_keys(const RingPtr& ring, const Matrix& B, std::size_t n, const EnumOptions& opt = {}) {
    const OrthForm src = OrthForm::validate(ring, B);
    std::vector<MorphismKey> out;
    for (auto& m : enumerate_isometries(src, OrthForm::identity(ring, n), opt)) {
        auto p = is_row_adapted(*ring, m);
        if (!p) continue;
        out.push_back({ring, B, std::move(m), std::move(*p)});
    }
    std::sort(out.begin(), out.end(), total_less);
    return out;
}

struct OrderCompatReport {
    Matrix phi;
    std::vector<std::vector<std::size_t>> deleted;  // per factor, 0-based
    bool phi_f_is_g = false;
    bool preserves_form = false;
    bool phi_row_adapted = false;
    std::size_t smaller_checked = 0;
    std::size_t violations = 0;  // f1 < f with phi f1 >= g, or a failed pivot-order bullet
    bool ok() const { return phi_f_is_g && preserves_form && phi_row_adapted && violations == 0; }
};

/// Builds phi for f <= g and checks g = phi f, form preservation, and that
/// every (or up to max_samples sampled) smaller f1 in Hom(d, n) has phi f1 < g.
inline OrderCompatReport check_order_compat(const MorphismKey& f, const MorphismKey& g, std::size_t max_samples = 0,
                                            std::uint64_t seed = 0) {
    require_same_hom(f, g);
    const Ring& R = *f.ring;
    OrderCompatReport rep;
    auto del = find_deletion(R, f.matrix, g.matrix);
    if (!del) throw DomainError("check_order_compat: f does not precede g");
    rep.deleted = *del;
    rep.phi = insertion_map(R, f.matrix, g.matrix);
    rep.phi_f_is_g = mul(R, rep.phi, f.matrix) == g.matrix;
    rep.preserves_form = congruence(R, rep.phi, Matrix::identity(R, g.n())) == Matrix::identity(R, f.n());
    rep.phi_row_adapted = is_row_adapted(R, rep.phi).has_value();

    auto keys = enumerate_keys(f.ring, f.B, f.n());
    std::vector<const MorphismKey*> smaller;
    for (const auto& h : keys)
        if (total_less(h, f)) smaller.push_back(&h);
    if (max_samples && smaller.size() > max_samples) {
        std::mt19937_64 rng(seed);
        std::shuffle(smaller.begin(), smaller.end(), rng);
        smaller.resize(max_samples);
    }
    for (const MorphismKey* h : smaller) {
        ++rep.smaller_checked;
        const Matrix img = mul(R, rep.phi, h->matrix);
        auto p = is_row_adapted(R, img);
        if (!p) {
            ++rep.violations;
            continue;
        }
        const MorphismKey ph{f.ring, f.B, img, *p};
        if (!total_less(ph, g)) ++rep.violations;
        for (std::size_t i = 0; i < R.num_factors(); ++i) {
            if (h->rows.pivots[i] < f.rows.pivots[i] && !(p->pivots[i] < g.rows.pivots[i])) ++rep.violations;
            if (h->rows.pivots[i] == f.rows.pivots[i]) {
                // phi h is h with the rows of g inserted at the deleted positions
                const Matrix hi = project(R, h->matrix, i), gi = project(R, g.matrix, i), ii = project(R, img, i);
                std::vector<char> d(g.n(), 0);
                for (auto j : rep.deleted[i]) d[j] = 1;
                for (std::size_t j = 0, k = 0; j < g.n(); ++j) {
                    const Matrix& src = d[j] ? gi : hi;
                    const std::size_t row = d[j] ? j : k++;
                    for (std::size_t c = 0; c < f.d(); ++c)
                        if (ii(j, c) != src(row, c)) {
                            ++rep.violations;
                            c = f.d();
                        }
                }
            }
        }
    }
    return rep;
}

}  // namespace orthstab
