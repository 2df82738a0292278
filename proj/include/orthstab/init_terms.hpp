#pragma once

// Initial terms in Q_{d,B} = K[Hom((R^d, B), -)] restricted to row-adapted
// isometries into identity forms, and the separation of a proper submodule
// from the whole by its initial terms.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "isometry.hpp"
#include "linalg_fp.hpp"
#include "wpo.hpp"

namespace orthstab {

/// Element of Q_{d,B}(R^n): coefficients on the keys at n (indices in total order).
struct QElement {
    std::size_t n = 0;
    fp::Sparse coeffs;
};

class QUniverse {
public:
    QUniverse(RingPtr ring, Matrix B, std::uint32_t ell, std::size_t horizon)
        : ring_(std::move(ring)), B_(std::move(B)), F_(fp::Field::make(ell)), horizon_(horizon) {
        OrthForm::validate(ring_, B_);
    }

    const fp::Field& field() const { return F_; }
    std::size_t d() const { return B_.rows; }
    std::size_t horizon() const { return horizon_; }
    const RingPtr& ring() const { return ring_; }

    struct Level {
        std::vector<MorphismKey> keys;
        std::unordered_map<Matrix, std::uint32_t, MatrixHash> index;
    };

    const Level& keys(std::size_t n) const {
        if (n > horizon_) throw DomainError("rank " + std::to_string(n) + " exceeds the horizon");
        auto& slot = keys_[n];
        if (!slot) {
            slot = std::make_unique<Level>();
            if (n >= d()) slot->keys = enumerate_keys(ring_, B_, n);
            for (std::uint32_t i = 0; i < slot->keys.size(); ++i) slot->index.emplace(slot->keys[i].matrix, i);
        }
        return *slot;
    }

    /// Row-adapted isometries I_m -> I_n (the morphisms acting on Q).
    const std::vector<MorphismKey>& maps(std::size_t m, std::size_t n) const {
        auto& slot = maps_[{m, n}];
        if (!slot) slot = std::make_unique<std::vector<MorphismKey>>(enumerate_keys(ring_, Matrix::identity(*ring_, m), n));
        return *slot;
    }

    /// phi . x for phi: I_m -> I_n row-adapted.
    QElement push(const Matrix& phi, const QElement& x) const {
        if (phi.cols != x.n) throw ShapeError("push: map does not start at the element's rank");
        const Level& src = keys(x.n);
        const Level& dst = keys(phi.rows);
        std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
        for (auto [k, c] : x.coeffs) {
            const Matrix img = mul(*ring_, phi, src.keys[k].matrix);
            auto it = dst.index.find(img);
            if (it == dst.index.end()) throw InternalError("push: image is not a key");
            acc.emplace_back(it->second, c);
        }
        return {phi.rows, fp::normalize(F_, std::move(acc))};
    }

    /// Spanning set of the submodule generated by `gens`, evaluated at R^n.
    std::vector<QElement> span_at(const std::vector<QElement>& gens, std::size_t n) const {
        std::vector<QElement> out;
        for (const auto& x : gens) {
            if (x.n > n) continue;
            for (const auto& phi : maps(x.n, n)) out.push_back(push(phi.matrix, x));
        }
        return out;
    }

    /// Initial terms (key indices) of the span of `elems` at R^n, ascending.
    std::vector<std::uint32_t> initial_terms(const std::vector<QElement>& elems, std::size_t n) const {
        const std::size_t K = keys(n).keys.size();
        // reversed columns: the echelon pivot is the largest key present
        fp::DenseEchelon e(F_, K);
        for (const auto& x : elems) {
            fp::Dense v(K, 0);
            for (auto [k, c] : x.coeffs) v[K - 1 - k] = c;
            e.insert(std::move(v));
        }
        std::vector<std::uint32_t> out;
        for (auto p : e.pivots()) out.push_back(static_cast<std::uint32_t>(K - 1 - p));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::size_t dim_span(const std::vector<QElement>& elems, std::size_t n) const { return initial_terms(elems, n).size(); }

private:
    RingPtr ring_;
    Matrix B_;
    fp::Field F_;
    std::size_t horizon_;
    mutable std::map<std::size_t, std::unique_ptr<Level>> keys_;
    mutable std::map<std::pair<std::size_t, std::size_t>, std::unique_ptr<std::vector<MorphismKey>>> maps_;
};

/// The maximal key with nonzero coefficient, with that coefficient.
inline std::pair<std::uint32_t, fp::Scalar> init_term(const QElement& x) {
    if (x.coeffs.empty()) throw DomainError("init_term of the zero element");
    return x.coeffs.back();
}

struct SeparationWitness {
    std::size_t n = 0;
    std::uint32_t key = 0;  // index into keys(n)
    std::vector<std::size_t> dims_sub, dims_full;  // per rank 0..horizon
};

/// For Msub generated by `sub` inside M generated by `full`: a key in
/// init(M)(R^n) \ init(Msub)(R^n).
inline SeparationWitness init_separates(const QUniverse& Q, const std::vector<QElement>& sub, const std::vector<QElement>& full) {
    const fp::Field& F = Q.field();
    SeparationWitness w;
    std::optional<std::pair<std::size_t, std::uint32_t>> found;
    bool proper = false;
    for (std::size_t n = 0; n <= Q.horizon(); ++n) {
        const auto sn = Q.span_at(sub, n), mn = Q.span_at(full, n);
        const std::size_t K = Q.keys(n).keys.size();
        fp::DenseEchelon e(F, K);
        for (const auto& x : mn) e.insert(fp::to_dense(x.coeffs, K));
        for (const auto& x : sn)
            if (!e.contains(fp::to_dense(x.coeffs, K))) throw DomainError("the given subspaces do not form a submodule at rank " + std::to_string(n));
        const auto a = Q.initial_terms(sn, n), b = Q.initial_terms(mn, n);
        w.dims_sub.push_back(a.size());
        w.dims_full.push_back(b.size());
        if (a.size() != b.size()) proper = true;
        if (!found)
            for (auto k : b)
                if (!std::binary_search(a.begin(), a.end(), k)) {
                    found = {n, k};
                    break;
                }
    }
    if (!proper) throw DomainError("the submodule equals the module within the horizon");
    if (!found) throw PropertyViolation("proper submodule with the same initial terms");
    w.n = found->first;
    w.key = found->second;
    return w;
}

struct SeparationFuzzReport {
    std::size_t instances = 0, witnesses = 0, violations = 0;
};

/// Random proper submodules of submodules of Q_{d,B} over the given ring;
/// d <= 1, targets up to `horizon`.
inline SeparationFuzzReport fuzz_init_separation(const RingPtr& ring, const std::vector<std::uint32_t>& ells, std::size_t instances,
                                                 std::size_t horizon, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SeparationFuzzReport rep;
    std::vector<Matrix> forms{Matrix(0, 0), Matrix::identity(*ring, 1), Matrix::diagonal({ring->nonsquare_unit(ring->all_factors())})};
    std::size_t attempts = 0;
    while (rep.instances < instances) {
        if (++attempts > 100 * instances) throw InternalError("fuzz: could not build proper submodules");
        const std::uint32_t ell = ells[rng() % ells.size()];
        const Matrix& B = forms[rng() % forms.size()];
        QUniverse Q(ring, B, ell, horizon);
        const auto& F = Q.field();
        auto random_element = [&](std::size_t n) -> std::optional<QElement> {
            const std::size_t K = Q.keys(n).keys.size();
            if (!K) return std::nullopt;
            std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
            const std::size_t terms = 1 + rng() % std::min<std::size_t>(K, 3);
            for (std::size_t t = 0; t < terms; ++t) acc.emplace_back(static_cast<std::uint32_t>(rng() % K), 1 + rng() % (F.p - 1));
            QElement x{n, fp::normalize(F, std::move(acc))};
            if (x.coeffs.empty()) return std::nullopt;
            return x;
        };
        std::vector<QElement> full;
        const std::size_t ngen = 1 + rng() % 3;
        for (std::size_t g = 0; g < ngen; ++g) {
            const std::size_t n = B.rows + rng() % (horizon - B.rows + 1);
            if (auto x = random_element(n)) full.push_back(std::move(*x));
        }
        if (full.empty()) continue;
        // sub: a random subset of the generators plus random multiples of the rest
        std::vector<QElement> sub;
        for (const auto& x : full) {
            if (rng() % 2) sub.push_back(x);
            const auto& maps = Q.maps(x.n, std::min(horizon, x.n + 1));
            if (!maps.empty() && rng() % 2) sub.push_back(Q.push(maps[rng() % maps.size()].matrix, x));
        }
        try {
            init_separates(Q, sub, full);
            ++rep.witnesses;
        } catch (const PropertyViolation&) {
            ++rep.violations;
        } catch (const DomainError&) {
            continue;  // not proper; draw again
        }
        ++rep.instances;
    }
    return rep;
}

}  // namespace orthstab
