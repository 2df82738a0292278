#pragma once

// Group homology H_k(G; M) over Z/l for finite groups acting linearly, from the
// bar complex. Only boundary columns whose last bar entry is a generator are
// materialized (they span the image), and degree 1 is computed in M^S after
// collapsing along a spanning tree of the Cayley graph.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "error.hpp"
#include "isometry.hpp"
#include "linalg_fp.hpp"
#include "ori_module.hpp"

namespace orthstab {

/// A finite group on {0, ..., order-1} with identity 0, a small generating set
/// and a breadth-first spanning tree of its right Cayley graph.
class GroupTable {
public:
    using Product = std::function<std::uint32_t(std::uint32_t, std::uint32_t)>;

    GroupTable(std::size_t order, Product prod) : n_(order), prod_(std::move(prod)) {
        if (n_ == 0) throw UsageError("empty group");
        inv_.assign(n_, 0);
        choose_generators();
        for (std::uint32_t g = 0; g < n_; ++g) {
            std::uint32_t x = g, prev = 0;
            // g^{-1} is the power of g just before the identity
            while (x != 0) {
                prev = x;
                x = prod_(x, g);
            }
            inv_[g] = g == 0 ? 0 : prev;
        }
    }

    static GroupTable from_table(std::size_t order, std::vector<std::uint32_t> table) {
        if (table.size() != order * order) throw ShapeError("multiplication table has the wrong size");
        auto t = std::make_shared<std::vector<std::uint32_t>>(std::move(table));
        return GroupTable(order, [t, order](std::uint32_t a, std::uint32_t b) { return (*t)[a * order + b]; });
    }
    static GroupTable cyclic(std::size_t n) {
        return GroupTable(n, [n](std::uint32_t a, std::uint32_t b) { return static_cast<std::uint32_t>((a + b) % n); });
    }
    static GroupTable from_orth(std::shared_ptr<const OrthGroup> G) {
        const std::size_t n = G->order();
        return GroupTable(n, [G](std::uint32_t a, std::uint32_t b) { return G->product(a, b); });
    }

    std::size_t order() const { return n_; }
    std::uint32_t inv(std::uint32_t g) const { return inv_[g]; }
    const std::vector<std::uint32_t>& generators() const { return gens_; }
    std::size_t num_generators() const { return gens_.size(); }
    /// g * gens[s]
    std::uint32_t right(std::uint32_t g, std::size_t s) const { return right_[g * gens_.size() + s]; }
    std::uint32_t parent(std::uint32_t g) const { return parent_[g]; }
    std::int64_t parent_gen(std::uint32_t g) const { return parent_gen_[g]; }
    bool tree_edge(std::uint32_t g, std::size_t s) const {
        const std::uint32_t h = right(g, s);
        return h != 0 && parent_[h] == g && parent_gen_[h] == static_cast<std::int64_t>(s);
    }

    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const {
        if (table_.empty()) return prod_(a, b);
        return table_[a * n_ + b];
    }
    void materialize_table() const {
        if (!table_.empty()) return;
        std::vector<std::uint32_t> t(n_ * n_);
        for (std::uint32_t a = 0; a < n_; ++a)
            for (std::uint32_t b = 0; b < n_; ++b) t[a * n_ + b] = prod_(a, b);
        table_ = std::move(t);
    }

private:
    void choose_generators() {
        std::vector<char> in(n_, 0);
        std::vector<std::uint32_t> members{0};
        in[0] = 1;
        for (std::uint32_t c = 1; c < n_ && members.size() < n_; ++c) {
            if (in[c]) continue;
            gens_.push_back(c);
            // closure of the subgroup under right multiplication by generators
            for (std::size_t i = 0; i < members.size(); ++i)
                for (auto s : gens_) {
                    const std::uint32_t h = prod_(members[i], s);
                    if (!in[h]) in[h] = 1, members.push_back(h);
                }
        }
        // most finite groups are 2-generated; a short seeded search keeps |S| small
        std::mt19937_64 rng(n_);
        for (int t = 0; gens_.size() > 2 && t < 64; ++t) {
            std::vector<std::uint32_t> pair{static_cast<std::uint32_t>(rng() % n_), static_cast<std::uint32_t>(rng() % n_)};
            if (closure_size(pair) == n_) gens_ = pair;
        }
        const std::size_t k = gens_.size();
        right_.assign(n_ * k, 0);
        parent_.assign(n_, 0);
        parent_gen_.assign(n_, -1);
        std::vector<char> seen(n_, 0);
        std::vector<std::uint32_t> queue{0};
        seen[0] = 1;
        for (std::size_t i = 0; i < queue.size(); ++i) {
            const std::uint32_t g = queue[i];
            for (std::size_t s = 0; s < k; ++s) {
                const std::uint32_t h = prod_(g, gens_[s]);
                right_[g * k + s] = h;
                if (!seen[h]) {
                    seen[h] = 1;
                    parent_[h] = g;
                    parent_gen_[h] = static_cast<std::int64_t>(s);
                    queue.push_back(h);
                }
            }
        }
        if (queue.size() != n_) throw InternalError("generating set does not reach every element");
    }

    std::size_t closure_size(const std::vector<std::uint32_t>& gens) const {
        std::vector<char> in(n_, 0);
        std::vector<std::uint32_t> members{0};
        in[0] = 1;
        for (std::size_t i = 0; i < members.size(); ++i)
            for (auto s : gens) {
                const std::uint32_t h = prod_(members[i], s);
                if (!in[h]) in[h] = 1, members.push_back(h);
            }
        return members.size();
    }

    std::size_t n_;
    Product prod_;
    std::vector<std::uint32_t> inv_, gens_, right_, parent_;
    std::vector<std::int64_t> parent_gen_;
    mutable std::vector<std::uint32_t> table_;
};

/// A left action of a finite group on K^dim, one matrix per element.
struct FiniteGroupRep {
    std::shared_ptr<const GroupTable> group;
    fp::Field field;
    std::size_t dim = 0;
    std::vector<LinearMap> rho;

    /// rho(gh) = rho(g) rho(h): exhaustive when |G| <= 50, else `samples` random pairs.
    void check_homomorphism(std::size_t samples = 200, std::uint64_t seed = 1) const {
        const auto& G = *group;
        if (!(rho.at(0) == LinearMap::identity(dim))) throw PropertyViolation("identity does not act trivially");
        auto check = [&](std::uint32_t a, std::uint32_t b) {
            if (!(rho[G.mul(a, b)] == compose(field, rho[a], rho[b])))
                throw PropertyViolation("action is not a homomorphism at (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        };
        if (G.order() <= 50) {
            for (std::uint32_t a = 0; a < G.order(); ++a)
                for (std::uint32_t b = 0; b < G.order(); ++b) check(a, b);
            return;
        }
        std::mt19937_64 rng(seed);
        for (std::size_t t = 0; t < samples; ++t) check(static_cast<std::uint32_t>(rng() % G.order()), static_cast<std::uint32_t>(rng() % G.order()));
    }
};

inline FiniteGroupRep trivial_rep(std::shared_ptr<const GroupTable> G, std::uint32_t ell, std::size_t dim = 1) {
    FiniteGroupRep r{G, fp::Field::make(ell), dim, {}};
    r.rho.assign(G->order(), LinearMap::identity(dim));
    return r;
}

/// K[X] for a permutation action given as act[g][x].
inline FiniteGroupRep permutation_rep(std::shared_ptr<const GroupTable> G, std::uint32_t ell, const std::vector<std::vector<std::uint32_t>>& act) {
    FiniteGroupRep r{G, fp::Field::make(ell), act.empty() ? 0 : act[0].size(), {}};
    for (const auto& perm : act) {
        LinearMap m{r.dim, r.dim, std::vector<fp::Sparse>(r.dim)};
        for (std::uint32_t x = 0; x < r.dim; ++x) m.columns[x] = {{perm[x], 1}};
        r.rho.push_back(std::move(m));
    }
    return r;
}

/// Aut(V) acting on M(V) for a skeleton object V.
struct ModuleRep {
    std::shared_ptr<const OrthGroup> orth;
    FiniteGroupRep rep;
};

inline ModuleRep module_rep(const Module& M, const ClassLabel& V) {
    auto G = std::make_shared<const OrthGroup>(OrthGroup::build(M.skeleton().rep(V), M.skeleton().options()));
    auto T = std::make_shared<const GroupTable>(GroupTable::from_orth(G));
    FiniteGroupRep r{T, M.field(), M.dim(V), {}};
    r.rho.reserve(G->order());
    for (const auto& g : G->elements()) r.rho.push_back(M.act(V, V, g));
    return {G, std::move(r)};
}

struct HomologyOptions {
    std::uint64_t budget = 5'000'000;  // materialized boundary columns dim * |G|^k * |S|
    bool check_action = true;
};

struct HomologyReport {
    std::vector<std::size_t> dims;            // H_0 .. H_kmax
    std::size_t coinvariants = 0;             // dim M / span{g x - x}
    std::vector<std::size_t> boundary_ranks;  // rank d_1 .. d_{kmax+1}
    std::uint64_t columns = 0;                // boundary columns materialized
    std::size_t group_order = 0, module_dim = 0, generators = 0;
};

namespace detail {

inline bool use_sparse(const fp::Field& F, std::size_t dim) { return F.p != 2 && dim > 256; }

/// x . g = rho(g^{-1}) x for a basis vector x.
inline const fp::Sparse& right_act(const FiniteGroupRep& r, std::uint32_t x, std::uint32_t g) { return r.rho[r.group->inv(g)].columns[x]; }

inline void add_scaled(std::vector<std::pair<std::uint32_t, fp::Scalar>>& acc, const fp::Field& F, const fp::Sparse& v, fp::Scalar c,
                       std::size_t offset) {
    for (auto [i, x] : v) acc.emplace_back(static_cast<std::uint32_t>(offset + i), F.mul(c, x));
}

/// Image of y (x) [h] in M^S: the sum over the tree path e = p_0, ..., p_k = h with
/// p_i = p_{i-1} s_i of (y . p_{i-1}) (x) [s_i].
inline void tree_image(std::vector<std::pair<std::uint32_t, fp::Scalar>>& acc, const FiniteGroupRep& r, const fp::Sparse& y,
                       std::uint32_t h, fp::Scalar c) {
    const auto& G = *r.group;
    const fp::Field& F = r.field;
    while (h != 0) {
        const std::uint32_t p = G.parent(h);
        const auto s = static_cast<std::size_t>(G.parent_gen(h));
        for (auto [i, x] : y) add_scaled(acc, F, right_act(r, i, p), F.mul(c, x), s * r.dim);
        h = p;
    }
}

/// d_1 on M^S: y (x) [s] -> y . s - y.
inline fp::Sparse reduced_d1(const FiniteGroupRep& r, const fp::Sparse& v) {
    const auto& G = *r.group;
    const fp::Field& F = r.field;
    std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
    for (auto [idx, c] : v) {
        const std::size_t s = idx / r.dim;
        const std::uint32_t x = static_cast<std::uint32_t>(idx % r.dim);
        add_scaled(acc, F, right_act(r, x, G.generators()[s]), c, 0);
        acc.emplace_back(x, F.neg(c));
    }
    return fp::normalize(F, std::move(acc));
}

/// Image in M^S of d_2(e_x (x) [g | s]) = (x . g) (x) [s] - x (x) [g s] + x (x) [g].
inline fp::Sparse reduced_d2_column(const FiniteGroupRep& r, std::uint32_t x, std::uint32_t g, std::size_t s) {
    const fp::Field& F = r.field;
    std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
    add_scaled(acc, F, right_act(r, x, g), 1, s * r.dim);
    const fp::Sparse ex{{x, 1}};
    tree_image(acc, r, ex, r.group->right(g, s), F.neg(1));
    tree_image(acc, r, ex, g, 1);
    return fp::normalize(F, std::move(acc));
}

/// dim M / span{g x - x : g in G}, over every group element. For permutation
/// actions the span of e_{gx} - e_x has rank D - #orbits, found by union-find.
inline std::size_t coinvariant_dim(const FiniteGroupRep& r) {
    const fp::Field& F = r.field;
    const std::size_t D = r.dim, m = r.group->order();
    bool permutation = true;
    for (const auto& a : r.rho)
        for (const auto& c : a.columns) permutation = permutation && c.size() == 1 && c[0].second == 1;
    if (permutation) {
        std::vector<std::uint32_t> parent(D);
        std::iota(parent.begin(), parent.end(), 0u);
        auto find = [&](std::uint32_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        std::size_t classes = D;
        for (std::uint32_t g = 0; g < m; ++g)
            for (std::uint32_t x = 0; x < D; ++x) {
                const auto a = find(x), b = find(r.rho[g].columns[x][0].first);
                if (a != b) parent[a] = b, --classes;
            }
        return classes;
    }
    fp::RankCounter span(F, D, use_sparse(F, D));
    for (std::uint32_t g = 0; g < m; ++g)
        for (std::uint32_t x = 0; x < D; ++x) {
            std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
            add_scaled(acc, F, r.rho[g].columns[x], 1, 0);
            acc.emplace_back(x, F.neg(1));
            span.insert(fp::normalize(F, std::move(acc)));
        }
    return D - span.rank();
}

}  // namespace detail

/// Cycles and boundaries of degree k (k <= 1) in reduced coordinates, with a
/// fixed basis of H_k and a tagged echelon giving coordinates of cycles.
class HomologyBasis {
public:
    HomologyBasis(const FiniteGroupRep& r, std::size_t k) : r_(&r), k_(k), F_(r.field) {
        if (k > 1) throw UsageError("homology bases are provided for k <= 1");
        const auto& G = *r.group;
        const std::size_t D = r.dim, nS = G.num_generators();
        dim_ = k == 0 ? D : D * nS;
        std::vector<fp::Dense> boundaries;
        fp::DenseEchelon B(F_, dim_);
        auto keep = [&](const fp::Sparse& c) {
            fp::Dense v = fp::to_dense(c, dim_);
            if (B.insert(v)) boundaries.push_back(std::move(v));
        };
        std::vector<fp::Dense> cycles;
        if (k == 0) {
            for (std::uint32_t x = 0; x < D; ++x)
                for (std::size_t s = 0; s < nS; ++s) {
                    std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
                    detail::add_scaled(acc, F_, detail::right_act(r, x, G.generators()[s]), 1, 0);
                    acc.emplace_back(x, F_.neg(1));
                    keep(fp::normalize(F_, std::move(acc)));
                }
            for (std::uint32_t x = 0; x < D; ++x) {
                fp::Dense e(D, 0);
                e[x] = 1;
                cycles.push_back(std::move(e));
            }
        } else {
            for (std::uint32_t g = 0; g < G.order(); ++g)
                for (std::size_t s = 0; s < nS; ++s) {
                    if (G.tree_edge(g, s)) continue;
                    for (std::uint32_t x = 0; x < D; ++x) keep(detail::reduced_d2_column(r, x, g, s));
                }
            std::vector<fp::Dense> d1rows(D, fp::Dense(dim_, 0));
            for (std::uint32_t c = 0; c < dim_; ++c)
                for (auto [i, v] : detail::reduced_d1(r, {{c, 1}})) d1rows[i][c] = v;
            cycles = fp::kernel(F_, d1rows, dim_);
        }
        for (auto& z : cycles)
            if (B.insert(z)) reps_.push_back(z);
        tagged_ = std::make_unique<fp::DenseEchelon>(F_, dim_, reps_.size());
        for (auto& b : boundaries) tagged_->insert(b);
        for (std::size_t i = 0; i < reps_.size(); ++i) {
            fp::Dense tag(reps_.size(), 0);
            tag[i] = 1;
            tagged_->insert(reps_[i], tag);
        }
    }

    std::size_t dim() const { return reps_.size(); }
    const std::vector<fp::Dense>& representatives() const { return reps_; }
    std::size_t space_dim() const { return dim_; }

    /// Coordinates of the class of a cycle.
    fp::Dense coordinates(fp::Dense v) const {
        fp::Dense tag(reps_.size(), 0);
        tagged_->reduce(v, &tag);
        if (std::any_of(v.begin(), v.end(), [](fp::Scalar x) { return x != 0; })) throw InternalError("vector is not a cycle");
        for (auto& t : tag) t = F_.neg(t);
        return tag;
    }

private:
    const FiniteGroupRep* r_;
    std::size_t k_;
    fp::Field F_;
    std::size_t dim_ = 0;
    std::vector<fp::Dense> reps_;
    std::unique_ptr<fp::DenseEchelon> tagged_;
};

inline HomologyReport homology_dims(const FiniteGroupRep& r, std::size_t k_max, const HomologyOptions& opt = {}) {
    if (k_max > 2) throw UsageError("homology is computed up to degree 2");
    const auto& G = *r.group;
    const fp::Field& F = r.field;
    const std::size_t m = G.order(), D = r.dim, nS = G.num_generators();
    HomologyReport rep;
    rep.group_order = m;
    rep.module_dim = D;
    rep.generators = nS;
    {
        std::uint64_t need = D * std::max<std::size_t>(nS, 1);
        for (std::size_t k = 0; k < k_max; ++k) need *= m;
        if (need > opt.budget)
            throw BudgetExceeded("bar complex needs " + std::to_string(need) + " boundary columns (|G| = " + std::to_string(m) +
                                 ", dim = " + std::to_string(D) + ", |S| = " + std::to_string(nS) + ") over the budget " +
                                 std::to_string(opt.budget));
    }
    if (opt.check_action) r.check_homomorphism();
    if (k_max >= 2) G.materialize_table();

    // degree 0: restricted d_1 and, independently, the full coinvariant span
    fp::RankCounter d1(F, D, detail::use_sparse(F, D));
    for (std::uint32_t x = 0; x < D; ++x)
        for (std::size_t s = 0; s < nS; ++s) {
            std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
            detail::add_scaled(acc, F, detail::right_act(r, x, G.generators()[s]), 1, 0);
            acc.emplace_back(x, F.neg(1));
            d1.insert(fp::normalize(F, std::move(acc)));
            ++rep.columns;
        }
    rep.coinvariants = detail::coinvariant_dim(r);
    const std::size_t r1 = d1.rank();
    rep.boundary_ranks.push_back(r1);
    rep.dims.push_back(D - r1);
    if (rep.coinvariants != rep.dims[0]) throw PropertyViolation("H_0 from the bar complex differs from the coinvariants");
    if (k_max == 0) return rep;

    // degree 1 in M^S
    const std::size_t DS = D * nS;
    std::size_t r1bar = 0;
    {
        fp::RankCounter c(F, D, detail::use_sparse(F, D));
        for (std::uint32_t i = 0; i < DS; ++i) c.insert(detail::reduced_d1(r, {{i, 1}}));
        r1bar = c.rank();
    }
    if (r1bar != r1) throw InternalError("reduced d_1 has a different rank");
    const std::size_t zdim = DS - r1bar;
    fp::RankCounter b1(F, DS, detail::use_sparse(F, DS));
    for (std::uint32_t g = 0; g < m && b1.rank() < zdim; ++g)
        for (std::size_t s = 0; s < nS && b1.rank() < zdim; ++s) {
            if (G.tree_edge(g, s)) continue;
            for (std::uint32_t x = 0; x < D; ++x) {
                const fp::Sparse col = detail::reduced_d2_column(r, x, g, s);
                ++rep.columns;
                if (!detail::reduced_d1(r, col).empty()) throw PropertyViolation("d_1 d_2 != 0");
                b1.insert(col);
            }
        }
    const std::size_t h1 = zdim - b1.rank();
    const std::size_t r2 = D * m - r1 - h1;  // rank of the full d_2
    rep.dims.push_back(h1);
    rep.boundary_ranks.push_back(r2);
    if (k_max == 1) return rep;

    // degree 2 on C_2 = M (x) K[G^2], index (a * m + b) * D + x
    const std::size_t C2 = D * m * m;
    const std::size_t zdim2 = C2 - r2;
    fp::RankCounter b2(F, C2, detail::use_sparse(F, C2) || C2 > 20000);
    auto c2 = [&](std::uint32_t a, std::uint32_t b) { return (static_cast<std::size_t>(a) * m + b) * D; };
    auto c1 = [&](std::uint32_t a) { return static_cast<std::size_t>(a) * D; };
    for (std::uint32_t g1 = 0; g1 < m && b2.rank() < zdim2; ++g1)
        for (std::uint32_t g2 = 0; g2 < m && b2.rank() < zdim2; ++g2)
            for (std::size_t s = 0; s < nS; ++s) {
                const std::uint32_t sg = G.generators()[s];
                for (std::uint32_t x = 0; x < D; ++x) {
                    const fp::Sparse ex{{x, 1}};
                    const fp::Sparse& xg1 = detail::right_act(r, x, g1);
                    std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
                    detail::add_scaled(acc, F, xg1, 1, c2(g2, sg));
                    detail::add_scaled(acc, F, ex, F.neg(1), c2(G.mul(g1, g2), sg));
                    detail::add_scaled(acc, F, ex, 1, c2(g1, G.mul(g2, sg)));
                    detail::add_scaled(acc, F, ex, F.neg(1), c2(g1, g2));
                    const fp::Sparse col = fp::normalize(F, std::move(acc));
                    ++rep.columns;
                    // d_2 of the column must vanish
                    std::vector<std::pair<std::uint32_t, fp::Scalar>> dd;
                    for (auto [idx, c] : col) {
                        const std::size_t pair = idx / D;
                        const std::uint32_t y = static_cast<std::uint32_t>(idx % D);
                        const std::uint32_t a = static_cast<std::uint32_t>(pair / m), b = static_cast<std::uint32_t>(pair % m);
                        detail::add_scaled(dd, F, detail::right_act(r, y, a), c, c1(b));
                        dd.emplace_back(static_cast<std::uint32_t>(c1(G.mul(a, b)) + y), F.neg(c));
                        dd.emplace_back(static_cast<std::uint32_t>(c1(a) + y), c);
                    }
                    if (!fp::normalize(F, std::move(dd)).empty()) throw PropertyViolation("d_2 d_3 != 0");
                    b2.insert(col);
                }
            }
    rep.dims.push_back(zdim2 - b2.rank());
    rep.boundary_ranks.push_back(b2.rank());
    return rep;
}

// -- maps between homology groups ------------------------------------------------

/// Aut(V) -> Aut(W) along phi: acts as phi g phi^{-1} on the image, identity on
/// its orthogonal complement. Returned as an index map between group elements.
inline std::vector<std::uint32_t> extension_by_identity(const OrthGroup& GV, const OrthGroup& GW, const Matrix& phi) {
    const Ring& R = *GV.form().ring;
    const Matrix& BV = GV.form().gram;
    const Matrix& GWm = GW.form().gram;
    if (!is_isometry(phi, GV.form(), GW.form())) throw DomainError("extension_by_identity: phi is not an isometry");
    const std::size_t n = GW.form().rank();
    Matrix L = BV.rows ? mul(R, inverse(R, BV), mul(R, phi.transpose(), GWm)) : Matrix(0, n);
    Matrix I = Matrix::identity(R, n);
    Matrix P = BV.rows ? mul(R, phi, L) : Matrix(n, n);
    Matrix rest = sub(R, I, P);
    std::vector<std::uint32_t> out;
    for (const auto& g : GV.elements()) {
        Matrix a = BV.rows ? add(R, mul(R, mul(R, phi, g), L), rest) : I;
        auto idx = GW.index_of(a);
        if (!idx) throw InternalError("extended automorphism is not in Aut(W)");
        out.push_back(*idx);
    }
    return out;
}

/// Matrix (columns in the target basis) of the map H_k(G_V; M(V)) -> H_k(G_W; M(W))
/// induced by a group map alpha and an equivariant module map A.
inline std::vector<fp::Dense> induced_map(const FiniteGroupRep& src, const HomologyBasis& hsrc, const FiniteGroupRep& dst,
                                          const HomologyBasis& hdst, const std::vector<std::uint32_t>& alpha, const LinearMap& A,
                                          std::size_t k) {
    const fp::Field& F = dst.field;
    std::vector<fp::Dense> cols;
    const auto& GV = *src.group;
    const auto& GW = *dst.group;
    for (const auto& z : hsrc.representatives()) {
        std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
        for (std::uint32_t idx = 0; idx < z.size(); ++idx) {
            if (!z[idx]) continue;
            if (k == 0) {
                detail::add_scaled(acc, F, A.columns[idx], z[idx], 0);
                continue;
            }
            const std::size_t s = idx / src.dim;
            const std::uint32_t x = static_cast<std::uint32_t>(idx % src.dim);
            const std::uint32_t h = alpha[GV.generators()[s]];
            detail::tree_image(acc, dst, A.columns[x], h, z[idx]);
        }
        (void)GW;
        cols.push_back(hdst.coordinates(fp::to_dense(fp::normalize(F, std::move(acc)), hdst.space_dim())));
    }
    return cols;
}

inline std::size_t dense_rank(const fp::Field& F, const std::vector<fp::Dense>& cols, std::size_t rows) {
    fp::DenseEchelon e(F, rows);
    for (const auto& c : cols) e.insert(c);
    return e.rank();
}

inline std::vector<fp::Dense> multiply(const fp::Field& F, const std::vector<fp::Dense>& outer, const std::vector<fp::Dense>& inner,
                                       std::size_t rows) {
    std::vector<fp::Dense> out;
    for (const auto& c : inner) {
        fp::Dense v(rows, 0);
        for (std::size_t j = 0; j < c.size(); ++j)
            if (c[j])
                for (std::size_t i = 0; i < rows; ++i) v[i] = F.add(v[i], F.mul(c[j], outer[j][i]));
        out.push_back(std::move(v));
    }
    return out;
}

// -- Shapiro instances -------------------------------------------------------------

struct ShapiroReport {
    ClassLabel V, W;
    std::size_t k = 0;
    std::uint32_t ell = 2;
    std::size_t aut_sum = 0, aut_w = 0, hom = 0;
    std::vector<std::size_t> left, right;  // H_0 .. H_k of both sides
    bool agree() const { return left == right; }
};

/// H_j(Aut(V + W); K[Hom(V, V + W)]) against H_j(Aut(W); K) for j <= k.
inline ShapiroReport shapiro_check(const RingPtr& ring, const ClassLabel& V, const ClassLabel& W, std::size_t k, std::uint32_t ell,
                                   const HomologyOptions& opt = {}, const EnumOptions& eopt = {}) {
    if (k > 1) throw UsageError("shapiro_check supports k <= 1");
    const fp::Field F = fp::Field::make(ell);
    for (std::size_t i = 0; i < ring->num_factors(); ++i)
        if (ring->factor(i).spec.p == ell) throw DomainError("l must differ from the residue characteristic");
    const OrthForm VF = OrthForm::standard(ring, V), WF = OrthForm::standard(ring, W);
    const OrthForm S = direct_sum(VF, WF);
    auto GS = std::make_shared<const OrthGroup>(OrthGroup::build(S, eopt));
    auto GW = std::make_shared<const OrthGroup>(OrthGroup::build(WF, eopt));
    std::vector<Matrix> hom = V.rank ? enumerate_isometries(VF, S, eopt) : std::vector<Matrix>{Matrix(S.rank(), 0)};
    std::unordered_map<Matrix, std::uint32_t, MatrixHash> index;
    for (std::uint32_t i = 0; i < hom.size(); ++i) index.emplace(hom[i], i);
    std::vector<std::vector<std::uint32_t>> act;
    for (const auto& g : GS->elements()) {
        std::vector<std::uint32_t> perm(hom.size());
        for (std::uint32_t i = 0; i < hom.size(); ++i) {
            auto it = index.find(mul(*ring, g, hom[i]));
            if (it == index.end()) throw InternalError("Aut(V + W) does not preserve Hom(V, V + W)");
            perm[i] = it->second;
        }
        act.push_back(std::move(perm));
    }
    ShapiroReport rep{V, W, k, ell, GS->order(), GW->order(), hom.size(), {}, {}};
    auto TS = std::make_shared<const GroupTable>(GroupTable::from_orth(GS));
    auto TW = std::make_shared<const GroupTable>(GroupTable::from_orth(GW));
    HomologyOptions o = opt;
    o.check_action = false;  // permutation action by left multiplication
    rep.left = homology_dims(permutation_rep(TS, ell, act), k, o).dims;
    rep.right = homology_dims(trivial_rep(TW, ell), k, o).dims;
    return rep;
}

// -- stability scans -----------------------------------------------------------

struct ScanRow {
    std::size_t n = 0;  // rank of the source
    ClassLabel source, target;
    std::size_t dim_source = 0, dim_target = 0, map_rank = 0;
};

struct ScanTable {
    std::string family;
    std::uint32_t ell = 2;
    std::size_t k = 0;
    std::vector<ScanRow> rows;
    std::optional<std::size_t> stable_from;  // least n after which every map is an isomorphism
    bool functorial = true;                  // composites of consecutive steps agree
};

struct ScanStep {
    ClassLabel source, target;
    Matrix phi;
};

/// The chain of objects and inclusions for a family, from rank `start` up to `stop`.
/// "X": X^n -> X^{n+1}. "XY": X^n + Y -> X^{n+1} + Y. "interleave": X^a -> X^a + Y ->
/// X^{a+2} -> ..., where X^a + Y -> X^{a+2} uses a fixed isometry Y^2 -> X^2.
inline std::vector<ScanStep> family_steps(const RingPtr& ring, const std::string& family, std::size_t start, std::size_t stop) {
    const Ring& R = *ring;
    std::vector<ScanStep> out;
    auto inclusion = [&](std::size_t n) {
        Matrix m(n + 1, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = R.one();
        return m;
    };
    if (family == "X") {
        for (std::size_t n = start; n < stop; ++n) out.push_back({{n, 0}, {n + 1, 0}, inclusion(n)});
    } else if (family == "XY") {
        if (start < 1) throw UsageError("family XY starts at rank 1");
        for (std::size_t n = start; n < stop; ++n) {
            Matrix m(n + 1, n);
            for (std::size_t i = 0; i + 1 < n; ++i) m(i, i) = R.one();
            m(n, n - 1) = R.one();
            out.push_back({{n, 1}, {n + 1, 1}, std::move(m)});
        }
    } else if (family == "interleave") {
        if (R.num_factors() != 1) throw UsageError("interleave family needs a local ring");
        // psi: Y^2 -> X^2 with psiᵀ I psi = diag(x, x)
        const OrthForm Y2 = power_form(ring, 1, 2);
        const Matrix psi = inverse(R, canonical_form(Y2).T);
        if (!is_isometry(psi, Y2, OrthForm::identity(ring, 2))) throw InternalError("fixed isometry Y^2 -> X^2 failed");
        ClassLabel cur = start % 2 == 0 ? ClassLabel{start, 0} : ClassLabel{start, 1};
        for (std::size_t n = start; n < stop; ++n) {
            if (cur.nonsquare == 0) {
                Matrix m = Matrix::identity(R, n + 1).columns(0, n);
                out.push_back({cur, {n + 1, 1}, std::move(m)});
                cur = {n + 1, 1};
            } else {
                // X^{n-1} + Y -> X^{n+1}: identity on X^{n-1}, Y -> first column of psi
                Matrix m(n + 1, n);
                for (std::size_t i = 0; i + 1 < n; ++i) m(i, i) = R.one();
                m(n - 1, n - 1) = psi(0, 0);
                m(n, n - 1) = psi(1, 0);
                out.push_back({cur, {n + 1, 0}, std::move(m)});
                cur = {n + 1, 0};
            }
        }
    } else {
        throw UsageError("unknown family '" + family + "' (expected X, XY or interleave)");
    }
    return out;
}

inline std::vector<ScanTable> stability_scan(const Module& M, const std::string& family, std::size_t start, std::size_t stop,
                                             std::size_t k_max, const HomologyOptions& opt = {}) {
    if (k_max > 1) throw UsageError("stability scans compute induced maps for k <= 1");
    const fp::Field& F = M.field();
    const auto steps = family_steps(M.skeleton().ring(), family, start, stop);
    std::map<ClassLabel, ModuleRep> reps;
    auto get = [&](const ClassLabel& V) -> const ModuleRep& {
        auto it = reps.find(V);
        if (it == reps.end()) {
            it = reps.emplace(V, module_rep(M, V)).first;
            homology_dims(it->second.rep, k_max, opt);  // budget and consistency checks
        }
        return it->second;
    };
    std::vector<ScanTable> tables;
    for (std::size_t k = 0; k <= k_max; ++k) {
        ScanTable t{family, F.p, k, {}, std::nullopt, true};
        std::map<ClassLabel, std::unique_ptr<HomologyBasis>> bases;
        auto basis = [&](const ClassLabel& V) -> const HomologyBasis& {
            auto& b = bases[V];
            if (!b) b = std::make_unique<HomologyBasis>(get(V).rep, k);
            return *b;
        };
        std::vector<std::vector<fp::Dense>> mats;
        for (const auto& st : steps) {
            const ModuleRep& a = get(st.source);
            const ModuleRep& b = get(st.target);
            const auto alpha = extension_by_identity(*a.orth, *b.orth, st.phi);
            const LinearMap A = M.act(st.source, st.target, st.phi);
            auto mat = induced_map(a.rep, basis(st.source), b.rep, basis(st.target), alpha, A, k);
            ScanRow row{st.source.rank, st.source, st.target, basis(st.source).dim(), basis(st.target).dim(), 0};
            row.map_rank = dense_rank(F, mat, row.dim_target);
            t.rows.push_back(row);
            mats.push_back(std::move(mat));
        }
        // composite of two consecutive steps against the induced map of the composite
        for (std::size_t i = 0; i + 1 < steps.size(); ++i) {
            const auto& s1 = steps[i];
            const auto& s2 = steps[i + 1];
            const ModuleRep& a = get(s1.source);
            const ModuleRep& c = get(s2.target);
            const Matrix phi = mul(*M.skeleton().ring(), s2.phi, s1.phi);
            const auto alpha = extension_by_identity(*a.orth, *c.orth, phi);
            auto direct = induced_map(a.rep, basis(s1.source), c.rep, basis(s2.target), alpha, M.act(s1.source, s2.target, phi), k);
            if (direct != multiply(F, mats[i + 1], mats[i], basis(s2.target).dim())) t.functorial = false;
        }
        for (std::size_t i = t.rows.size(); i-- > 0;) {
            const auto& r = t.rows[i];
            if (!(r.dim_source == r.dim_target && r.map_rank == r.dim_target)) break;
            t.stable_from = r.n;
        }
        tables.push_back(std::move(t));
    }
    return tables;
}

}  // namespace orthstab
