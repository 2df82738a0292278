#pragma once

// Isometries between orthogonal modules: exhaustive enumeration, orthogonal
// groups as explicit finite groups, and the constructive transporter and
// factorization maps.

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "form.hpp"
#include "matrix.hpp"
#include "ring.hpp"

namespace orthstab {

struct MatrixHash {
    std::size_t operator()(const Matrix& m) const noexcept {
        std::uint64_t h = 1469598103934665603ull ^ (m.rows * 131 + m.cols);
        for (auto e : m.data) {
            h ^= e;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

struct Isometry {
    OrthForm source, target;
    Matrix matrix;  // target.rank() x source.rank()
};

inline bool is_isometry(const Matrix& m, const OrthForm& src, const OrthForm& tgt) {
    require_same_ring(*src.ring, *tgt.ring);
    if (m.rows != tgt.rank() || m.cols != src.rank())
        throw ShapeError("isometry matrix must be " + std::to_string(tgt.rank()) + "x" + std::to_string(src.rank()));
    return congruence(*src.ring, m, tgt.gram) == src.gram;
}

inline Isometry make_isometry(OrthForm src, OrthForm tgt, Matrix m) {
    if (!is_isometry(m, src, tgt)) throw DomainError("matrix does not preserve the forms");
    return {std::move(src), std::move(tgt), std::move(m)};
}

inline Matrix compose(const Ring& R, const Matrix& outer, const Matrix& inner) { return mul(R, outer, inner); }

struct EnumOptions {
    std::uint64_t budget = 10'000'000;  // candidate column extensions
    unsigned threads = 1;
};

namespace detail {

/// All vectors of R^n in lex order, bucketed by their norm B(v, v).
class VectorTable {
public:
    static constexpr std::uint64_t kMaxVectors = 1ull << 22;

    VectorTable(const OrthForm& W) : R_(*W.ring), n_(W.rank()) {
        std::uint64_t count = 1;
        for (std::size_t i = 0; i < n_; ++i) {
            count *= R_.size();
            if (count > kMaxVectors)
                throw BudgetExceeded("vector table for rank " + std::to_string(n_) + " over " + R_.describe() +
                                     " exceeds " + std::to_string(kMaxVectors) + " vectors");
        }
        count_ = count;
        coords_.resize(count_ * n_);
        for (std::uint64_t v = 0; v < count_; ++v) {
            std::uint64_t x = v;
            for (std::size_t k = n_; k-- > 0;) {
                coords_[v * n_ + k] = static_cast<Elem>(x % R_.size());
                x /= R_.size();
            }
            std::vector<Elem> vec(coords_.begin() + static_cast<std::ptrdiff_t>(v * n_),
                                  coords_.begin() + static_cast<std::ptrdiff_t>((v + 1) * n_));
            by_norm_[dot(R_, vec, W.gram, vec)].push_back(static_cast<std::uint32_t>(v));
        }
    }

    const Elem* vec(std::uint32_t v) const { return coords_.data() + static_cast<std::size_t>(v) * n_; }
    const std::vector<std::uint32_t>& with_norm(Elem norm) const {
        static const std::vector<std::uint32_t> empty;
        auto it = by_norm_.find(norm);
        return it == by_norm_.end() ? empty : it->second;
    }
    std::size_t dim() const { return n_; }

private:
    const Ring& R_;
    std::size_t n_;
    std::uint64_t count_ = 0;
    std::vector<Elem> coords_;
    std::unordered_map<Elem, std::vector<std::uint32_t>> by_norm_;
};

/// Column-by-column DFS over isometries src -> tgt. `emit` receives the chosen
/// vector indices; enumeration order is lexicographic on the column tuple.
class IsometrySearch {
public:
    IsometrySearch(const OrthForm& src, const OrthForm& tgt, const EnumOptions& opt)
        : src_(src), tgt_(tgt), R_(*src.ring), opt_(opt) {
        require_same_ring(*src.ring, *tgt.ring);
    }

    /// Completed isometries (only when `keep`) and their count. First-column
    /// candidates are shared among threads and merged back in order.
    std::pair<std::vector<Matrix>, std::uint64_t> enumerate(bool keep) {
        const std::size_t d = src_.rank(), n = tgt_.rank();
        if (d == 0) {
            std::vector<Matrix> out;
            if (keep) out.emplace_back(n, 0);
            return {out, 1};
        }
        if (d > n || (d == n && src_.label != tgt_.label)) return {{}, 0};
        table_.emplace(tgt_);
        const auto& roots = table_->with_norm(src_.gram(0, 0));
        const unsigned threads = std::max(1u, std::min<unsigned>(opt_.threads, static_cast<unsigned>(roots.size())));
        std::vector<std::vector<Matrix>> found(roots.size());
        std::vector<std::uint64_t> counts(roots.size(), 0);
        std::atomic<std::size_t> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        auto worker = [&] {
            try {
                std::vector<std::uint32_t> cols(d);
                std::vector<std::vector<Elem>> gcols(d, std::vector<Elem>(n));
                for (std::size_t r; (r = next.fetch_add(1)) < roots.size();) {
                    charge();
                    cols[0] = roots[r];
                    set_gcol(gcols[0], roots[r]);
                    dfs(1, cols, gcols, keep ? &found[r] : nullptr, counts[r]);
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = roots.size();
            }
        };
        if (threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
            for (auto& t : pool) t.join();
        }
        if (error) std::rethrow_exception(error);
        std::vector<Matrix> all;
        std::uint64_t total = 0;
        for (std::size_t r = 0; r < roots.size(); ++r) {
            total += counts[r];
            for (auto& m : found[r]) all.push_back(std::move(m));
        }
        return {std::move(all), total};
    }

private:
    void charge() {
        const auto used = used_.fetch_add(1) + 1;
        if (used > opt_.budget)
            throw BudgetExceeded("isometry enumeration exceeded budget of " + std::to_string(opt_.budget) +
                                 " candidate extensions (source rank " + std::to_string(src_.rank()) + ", target rank " +
                                 std::to_string(tgt_.rank()) + " over " + R_.describe() + ")");
    }

    void set_gcol(std::vector<Elem>& out, std::uint32_t v) const {
        const Elem* x = table_->vec(v);
        const std::size_t n = tgt_.rank();
        for (std::size_t r = 0; r < n; ++r) {
            Elem s = 0;
            for (std::size_t c = 0; c < n; ++c)
                if (x[c]) s = R_.add(s, R_.mul(tgt_.gram(r, c), x[c]));
            out[r] = s;
        }
    }

    void dfs(std::size_t j, std::vector<std::uint32_t>& cols, std::vector<std::vector<Elem>>& gcols,
             std::vector<Matrix>* out, std::uint64_t& count) {
        const std::size_t d = src_.rank(), n = tgt_.rank();
        if (j == d) {
            ++count;
            if (out) {
                Matrix m(n, d);
                for (std::size_t c = 0; c < d; ++c) {
                    const Elem* x = table_->vec(cols[c]);
                    for (std::size_t r = 0; r < n; ++r) m(r, c) = x[r];
                }
                out->push_back(std::move(m));
            }
            return;
        }
        for (std::uint32_t v : table_->with_norm(src_.gram(j, j))) {
            charge();
            const Elem* x = table_->vec(v);
            bool ok = true;
            for (std::size_t i = 0; i < j && ok; ++i) {
                Elem s = 0;
                for (std::size_t r = 0; r < n; ++r)
                    if (x[r]) s = R_.add(s, R_.mul(gcols[i][r], x[r]));
                ok = s == src_.gram(i, j);
            }
            if (!ok) continue;
            cols[j] = v;
            set_gcol(gcols[j], v);
            dfs(j + 1, cols, gcols, out, count);
        }
    }

    const OrthForm& src_;
    const OrthForm& tgt_;
    const Ring& R_;
    EnumOptions opt_;
    std::optional<VectorTable> table_;
    std::atomic<std::uint64_t> used_{0};
};

}  // namespace detail

/// All isometries src -> tgt in lexicographic order on the column tuple.
inline std::vector<Matrix> enumerate_isometries(const OrthForm& src, const OrthForm& tgt, const EnumOptions& opt = {}) {
    detail::IsometrySearch s(src, tgt, opt);
    return s.enumerate(true).first;
}

inline std::uint64_t count_isometries(const OrthForm& src, const OrthForm& tgt, const EnumOptions& opt = {}) {
    detail::IsometrySearch s(src, tgt, opt);
    return s.enumerate(false).second;
}

/// Hom(src, tgt) is nonempty.
inline bool embeds(const OrthForm& src, const OrthForm& tgt) {
    require_same_ring(*src.ring, *tgt.ring);
    return src.rank() < tgt.rank() || (src.rank() == tgt.rank() && src.label == tgt.label);
}

class OrthGroup {
public:
    static OrthGroup build(const OrthForm& form, const EnumOptions& opt = {}) {
        OrthGroup g;
        g.form_ = form;
        auto all = enumerate_isometries(form, form, opt);
        const Matrix id = Matrix::identity(*form.ring, form.rank());
        g.elements_.reserve(all.size());
        g.elements_.push_back(id);
        for (auto& m : all)
            if (!(m == id)) g.elements_.push_back(std::move(m));
        if (g.elements_.size() != all.size()) throw InternalError("identity missing from automorphism enumeration");
        for (std::size_t i = 0; i < g.elements_.size(); ++i) g.index_.emplace(g.elements_[i], static_cast<std::uint32_t>(i));
        return g;
    }

    const OrthForm& form() const { return form_; }
    std::size_t order() const { return elements_.size(); }
    const std::vector<Matrix>& elements() const { return elements_; }
    const Matrix& element(std::size_t i) const { return elements_.at(i); }

    std::optional<std::uint32_t> index_of(const Matrix& m) const {
        auto it = index_.find(m);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }
    std::uint32_t product(std::uint32_t a, std::uint32_t b) const {
        auto idx = index_of(mul(*form_.ring, elements_[a], elements_[b]));
        if (!idx) throw InternalError("automorphism group not closed under composition");
        return *idx;
    }
    std::uint32_t inverse(std::uint32_t a) const {
        auto idx = index_of(orthstab::inverse(*form_.ring, elements_[a]));
        if (!idx) throw InternalError("automorphism group not closed under inverse");
        return *idx;
    }
    /// Row-major table: table[a * order + b] = index of a*b.
    std::vector<std::uint32_t> multiplication_table() const {
        const std::size_t n = order();
        std::vector<std::uint32_t> t(n * n);
        for (std::uint32_t a = 0; a < n; ++a)
            for (std::uint32_t b = 0; b < n; ++b) t[a * n + b] = product(a, b);
        return t;
    }

private:
    OrthForm form_;
    std::vector<Matrix> elements_;
    std::unordered_map<Matrix, std::uint32_t, MatrixHash> index_;
};

/// Some phi in Aut(W) with phi f = g, assembled from the complements of the
/// two images and an isometry between them.
inline Matrix find_transporter(const OrthForm& V, const OrthForm& W, const Matrix& f, const Matrix& g) {
    const Ring& R = *W.ring;
    if (!is_isometry(f, V, W) || !is_isometry(g, V, W)) throw DomainError("transporter: inputs are not isometries V -> W");
    if (f == g) return Matrix::identity(R, W.rank());
    const auto Cf = orthogonal_complement(W, f);
    const auto Cg = orthogonal_complement(W, g);
    const auto Tf = canonical_form(Cf.form);
    const auto Tg = canonical_form(Cg.form);
    if (Tf.label != Tg.label) throw InternalError("transporter: complements are not isometric");
    Matrix psi = Cf.form.rank() ? mul(R, Tg.T, inverse(R, Tf.T)) : Matrix();
    const Matrix A = Matrix::hconcat(f, Cf.embedding);
    const Matrix B = Matrix::hconcat(g, Cf.form.rank() ? mul(R, Cg.embedding, psi) : Cg.embedding);
    Matrix phi = mul(R, B, inverse(R, A));
    if (!(mul(R, phi, f) == g) || !is_isometry(phi, W, W)) throw InternalError("transporter postcondition failed");
    return phi;
}

/// A fixed isometry V -> W, from the canonical forms of V + (R, X_{I_V xor I_W})^(rank difference) and W.
inline Matrix standard_embedding(const OrthForm& V, const OrthForm& W) {
    const Ring& R = *W.ring;
    require_same_ring(*V.ring, R);
    if (V.rank() > W.rank()) throw DomainError("no isometry from rank " + std::to_string(V.rank()) + " into rank " + std::to_string(W.rank()));
    if (V.rank() == W.rank() && V.label != W.label)
        throw DomainError("no isometry between equal-rank forms of classes " + V.label.to_string() + " and " + W.label.to_string());
    if (V.rank() == 0) return Matrix(W.rank(), 0);
    const ClassLabel extra{W.rank() - V.rank(), V.label.nonsquare ^ W.label.nonsquare};
    const OrthForm sum = extra.rank ? direct_sum(V, OrthForm::standard(W.ring, extra)) : V;
    const auto T1 = canonical_form(sum), T2 = canonical_form(W);
    const Matrix iota = mul(R, T2.T, inverse(R, T1.T));
    Matrix i = iota.columns(0, V.rank());
    if (!is_isometry(i, V, W)) throw InternalError("standard embedding is not an isometry");
    return i;
}

/// h: V -> W with h f = g, for f: U -> V and g: U -> W.
inline Matrix factor_through(const OrthForm& U, const OrthForm& V, const OrthForm& W, const Matrix& f, const Matrix& g) {
    const Ring& R = *W.ring;
    if (!is_isometry(f, U, V) || !is_isometry(g, U, W)) throw DomainError("factor_through: inputs are not isometries");
    const Matrix i = standard_embedding(V, W);
    const Matrix k = find_transporter(U, W, mul(R, i, f), g);
    Matrix h = mul(R, k, i);
    if (!(mul(R, h, f) == g)) throw InternalError("factor_through postcondition failed");
    return h;
}

struct HomCount {
    std::uint64_t hom = 0;       // |Hom(V, V + W)|
    std::uint64_t aut_sum = 0;   // |Aut(V + W)|
    std::uint64_t aut_w = 0;     // |Aut(W)|
    bool agree() const { return aut_w && aut_sum % aut_w == 0 && hom == aut_sum / aut_w; }
};

inline HomCount hom_count(const OrthForm& V, const OrthForm& W, const EnumOptions& opt = {}) {
    const OrthForm S = direct_sum(V, W);
    HomCount c;
    c.hom = count_isometries(V, S, opt);
    c.aut_sum = count_isometries(S, S, opt);
    c.aut_w = count_isometries(W, W, opt);
    return c;
}

}  // namespace orthstab
