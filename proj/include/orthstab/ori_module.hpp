#pragma once

// Finitely presented functors from orthogonal modules and isometries to
// vector spaces over Z/l, evaluated on a skeleton of class representatives.
// Torsion, the complex Sigma_{I,n}, and the finite Kan-extension colimit.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "error.hpp"
#include "form.hpp"
#include "isometry.hpp"
#include "linalg_fp.hpp"
#include "matrix.hpp"
#include "ring.hpp"

namespace orthstab {

/// All class labels of a given rank (rank 0 has only the empty label).
inline std::vector<ClassLabel> labels_of_rank(const Ring& R, std::size_t rank) {
    if (rank == 0) return {ClassLabel{0, 0}};
    std::vector<ClassLabel> out;
    for (FactorMask m = 0; m <= R.all_factors(); ++m) out.push_back({rank, m});
    return out;
}

struct HomSet {
    std::vector<Matrix> maps;
    std::unordered_map<Matrix, std::uint32_t, MatrixHash> index;

    std::size_t size() const { return maps.size(); }
    std::uint32_t at(const Matrix& m) const {
        auto it = index.find(m);
        if (it == index.end()) throw InternalError("morphism missing from its Hom-set");
        return it->second;
    }
};

/// Class representatives diag(1, ..., 1, x_I) up to a horizon, with cached Hom-sets.
class Skeleton {
public:
    Skeleton(RingPtr ring, std::size_t horizon, EnumOptions opt = {}) : ring_(std::move(ring)), horizon_(horizon), opt_(opt) {}

    const RingPtr& ring() const { return ring_; }
    std::size_t horizon() const { return horizon_; }
    const EnumOptions& options() const { return opt_; }

    void check(const ClassLabel& l) const {
        if (l.rank > horizon_)
            throw DomainError("rank " + std::to_string(l.rank) + " exceeds the horizon " + std::to_string(horizon_));
        if (l.rank == 0 && l.nonsquare) throw DomainError("rank-0 object has an empty label");
        if (l.nonsquare & ~ring_->all_factors()) throw UsageError("label refers to a missing factor");
    }

    std::vector<ClassLabel> objects(std::size_t rank) const { return labels_of_rank(*ring_, rank); }

    OrthForm rep(const ClassLabel& l) const {
        check(l);
        return OrthForm::standard(ring_, l);
    }

    const HomSet& hom(const ClassLabel& U, const ClassLabel& V) const {
        check(U);
        check(V);
        std::lock_guard lock(mu_);
        auto& slot = homs_[{U, V}];
        if (!slot) {
            auto h = std::make_unique<HomSet>();
            if (embeds(rep(U), rep(V))) {
                if (U.rank == 0)
                    h->maps.push_back(Matrix(V.rank, 0));
                else
                    h->maps = enumerate_isometries(rep(U), rep(V), opt_);
            }
            for (std::uint32_t i = 0; i < h->maps.size(); ++i) h->index.emplace(h->maps[i], i);
            slot = std::move(h);
        }
        return *slot;
    }

    /// A fixed isometry rep(C) -> C (identity when C already is its representative).
    static Matrix rep_iso(const OrthForm& C) {
        if (C.rank() == 0) return Matrix();
        const auto cf = canonical_form(C);
        if (C.gram == OrthForm::standard(C.ring, cf.label).gram) return Matrix::identity(*C.ring, C.rank());
        return cf.T;
    }

private:
    RingPtr ring_;
    std::size_t horizon_;
    EnumOptions opt_;
    mutable std::mutex mu_;
    mutable std::map<std::pair<ClassLabel, ClassLabel>, std::unique_ptr<HomSet>> homs_;
};

// -- presentations -------------------------------------------------------------

struct Generator {
    ClassLabel object;
    std::string tag;
};

struct RelationTerm {
    std::size_t gen = 0;
    Matrix morphism;  // U_gen -> target
    std::int64_t coeff = 1;
};

struct Relation {
    ClassLabel target;
    std::vector<RelationTerm> terms;
};

struct ModulePresentation {
    RingPtr ring;
    std::uint32_t ell = 2;
    std::size_t horizon = 0;
    std::vector<Generator> generators;
    std::vector<Relation> relations;

    /// P_U = K[Hom(U, -)].
    static ModulePresentation representable(RingPtr ring, std::uint32_t ell, std::size_t horizon, ClassLabel U) {
        return {std::move(ring), ell, horizon, {{U, "P"}}, {}};
    }
    /// The constant functor K.
    static ModulePresentation constant(RingPtr ring, std::uint32_t ell, std::size_t horizon) {
        return representable(std::move(ring), ell, horizon, {0, 0});
    }
};

/// A linear map K^cols -> K^rows stored by sparse columns.
struct LinearMap {
    std::size_t rows = 0, cols = 0;
    std::vector<fp::Sparse> columns;

    friend bool operator==(const LinearMap&, const LinearMap&) = default;

    static LinearMap identity(std::size_t n) {
        LinearMap m{n, n, std::vector<fp::Sparse>(n)};
        for (std::uint32_t i = 0; i < n; ++i) m.columns[i] = {{i, 1}};
        return m;
    }
    fp::Sparse apply(const fp::Field& F, const fp::Sparse& v) const {
        std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
        for (auto [i, x] : v)
            for (auto [r, y] : columns[i]) acc.emplace_back(r, F.mul(x, y));
        return fp::normalize(F, std::move(acc));
    }
    std::size_t rank(const fp::Field& F) const { return fp::rank_of(F, columns, rows); }
};

inline LinearMap compose(const fp::Field& F, const LinearMap& outer, const LinearMap& inner) {
    if (outer.cols != inner.rows) throw ShapeError("linear maps do not compose");
    LinearMap out{outer.rows, inner.cols, {}};
    for (const auto& c : inner.columns) out.columns.push_back(outer.apply(F, c));
    return out;
}

/// Evaluates a presentation object by object; results are cached.
class Module {
public:
    struct Value {
        ClassLabel object;
        std::size_t free_dim = 0;
        std::vector<std::size_t> offset;  // per generator, into the free space
        fp::Rref relations;               // row space of the pushed-forward relations
        std::vector<std::uint32_t> basis;  // free columns that form the quotient basis
        std::vector<std::int64_t> coord;   // free column -> basis position or -1

        std::size_t dim() const { return basis.size(); }
    };

    Module(ModulePresentation p, EnumOptions opt = {})
        : pres_(std::move(p)), F_(fp::Field::make(pres_.ell)), skel_(pres_.ring, pres_.horizon, opt) {
        for (const auto& g : pres_.generators) skel_.check(g.object);
        for (const auto& r : pres_.relations) {
            skel_.check(r.target);
            const OrthForm T = skel_.rep(r.target);
            for (const auto& t : r.terms) {
                if (t.gen >= pres_.generators.size()) throw UsageError("relation refers to generator " + std::to_string(t.gen));
                const OrthForm U = skel_.rep(pres_.generators[t.gen].object);
                if (!is_isometry(t.morphism, U, T)) throw DomainError("relation morphism is not an isometry into its target");
            }
        }
    }

    const ModulePresentation& presentation() const { return pres_; }
    const fp::Field& field() const { return F_; }
    const Skeleton& skeleton() const { return skel_; }

    const Value& value(const ClassLabel& V) const {
        skel_.check(V);
        {
            std::lock_guard lock(mu_);
            auto it = values_.find(V);
            if (it != values_.end()) return *it->second;
        }
        auto v = std::make_unique<Value>(compute(V));
        std::lock_guard lock(mu_);
        auto& slot = values_[V];
        if (!slot) slot = std::move(v);
        return *slot;
    }

    std::size_t dim(const ClassLabel& V) const { return value(V).dim(); }

    /// Basis element b of M(V) as (generator, morphism index into Hom(U_g, V)).
    std::pair<std::size_t, std::uint32_t> describe(const ClassLabel& V, std::size_t b) const {
        const Value& val = value(V);
        const std::uint32_t col = val.basis.at(b);
        std::size_t g = 0;
        while (g + 1 < val.offset.size() && val.offset[g + 1] <= col) ++g;
        return {g, static_cast<std::uint32_t>(col - val.offset[g])};
    }

    /// Coordinates in M(V) of a vector in the free space.
    fp::Sparse reduce(const Value& val, const fp::Sparse& free) const {
        if (val.relations.rows.empty()) {
            std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
            for (auto [c, x] : free) acc.emplace_back(static_cast<std::uint32_t>(val.coord[c]), x);
            return fp::normalize(F_, std::move(acc));
        }
        fp::Dense d = fp::to_dense(free, val.free_dim);
        fp::reduce_mod(F_, val.relations, d);
        fp::Sparse out;
        for (std::uint32_t b = 0; b < val.basis.size(); ++b)
            if (d[val.basis[b]]) out.emplace_back(b, d[val.basis[b]]);
        return out;
    }

    /// M(f) for f: rep(V) -> rep(W).
    LinearMap act(const ClassLabel& V, const ClassLabel& W, const Matrix& f) const {
        const Value& a = value(V);
        const Value& b = value(W);
        if (!is_isometry(f, skel_.rep(V), skel_.rep(W))) throw DomainError("act: morphism is not an isometry between the representatives");
        const Ring& R = *pres_.ring;
        LinearMap m{b.dim(), a.dim(), {}};
        m.columns.reserve(a.dim());
        for (std::size_t k = 0; k < a.dim(); ++k) {
            auto [g, idx] = describe(V, k);
            const ClassLabel& U = pres_.generators[g].object;
            const Matrix& h = skel_.hom(U, V).maps[idx];
            const std::uint32_t j = skel_.hom(U, W).at(mul(R, f, h));
            m.columns.push_back(reduce(b, {{static_cast<std::uint32_t>(b.offset[g] + j), 1}}));
        }
        return m;
    }

    /// M(u) for an isometry u: C -> D between arbitrary forms, through the fixed
    /// isomorphisms with their representatives.
    LinearMap act_forms(const OrthForm& C, const OrthForm& D, const Matrix& u) const {
        const Ring& R = *pres_.ring;
        const Matrix tc = Skeleton::rep_iso(C), td = Skeleton::rep_iso(D);
        const Matrix v = D.rank() ? mul(R, mul(R, inverse(R, td), u), tc) : Matrix(0, C.rank());
        return act(C.label, D.label, C.rank() ? v : Matrix(D.rank(), 0));
    }

private:
    Value compute(const ClassLabel& V) const {
        const Ring& R = *pres_.ring;
        Value val;
        val.object = V;
        for (const auto& g : pres_.generators) {
            val.offset.push_back(val.free_dim);
            val.free_dim += skel_.hom(g.object, V).size();
        }
        std::vector<fp::Dense> rels;
        for (const auto& r : pres_.relations) {
            const HomSet& push = skel_.hom(r.target, V);
            for (const Matrix& phi : push.maps) {
                std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
                for (const auto& t : r.terms) {
                    const ClassLabel& U = pres_.generators[t.gen].object;
                    const std::uint32_t j = skel_.hom(U, V).at(mul(R, phi, t.morphism));
                    acc.emplace_back(static_cast<std::uint32_t>(val.offset[t.gen] + j), F_.from_int(t.coeff));
                }
                auto s = fp::normalize(F_, std::move(acc));
                if (!s.empty()) rels.push_back(fp::to_dense(s, val.free_dim));
            }
        }
        val.relations = fp::rref(F_, rels, val.free_dim);
        val.coord.assign(val.free_dim, -1);
        for (std::uint32_t c = 0; c < val.free_dim; ++c)
            if (val.relations.row_of[c] < 0) {
                val.coord[c] = static_cast<std::int64_t>(val.basis.size());
                val.basis.push_back(c);
            }
        return val;
    }

    ModulePresentation pres_;
    fp::Field F_;
    Skeleton skel_;
    mutable std::mutex mu_;
    mutable std::map<ClassLabel, std::unique_ptr<Module::Value>> values_;
};

// -- torsion ---------------------------------------------------------------------

struct TorsionReport {
    ClassLabel object;
    std::size_t module_dim = 0;
    std::size_t torsion_dim = 0;
    std::vector<fp::Dense> basis;  // of the torsion subspace, in M(V) coordinates
    std::vector<std::pair<ClassLabel, std::size_t>> kernels;  // per probed W
    bool union_is_subspace = true;  // one probed kernel contains all the others
};

/// Elements of M(V) killed by some f: V -> W with rank W <= probe_horizon. All
/// maps V -> W are Aut(W)-conjugate, so one fixed f per W gives its kernel.
inline TorsionReport torsion(const Module& M, const ClassLabel& V, std::size_t probe_horizon) {
    const auto& F = M.field();
    const auto& S = M.skeleton();
    TorsionReport rep;
    rep.object = V;
    rep.module_dim = M.dim(V);
    const std::size_t top = std::min(probe_horizon, S.horizon());
    std::vector<std::vector<fp::Dense>> kernels;
    for (std::size_t r = V.rank; r <= top; ++r)
        for (const auto& W : S.objects(r)) {
            if (!embeds(S.rep(V), S.rep(W))) continue;
            const Matrix f = standard_embedding(S.rep(V), S.rep(W));
            const LinearMap a = M.act(V, W, f);
            std::vector<fp::Dense> rows(a.rows, fp::Dense(a.cols, 0));
            for (std::size_t c = 0; c < a.cols; ++c)
                for (auto [i, x] : a.columns[c]) rows[i][c] = x;
            auto k = fp::kernel(F, rows, a.cols);
            rep.kernels.emplace_back(W, k.size());
            kernels.push_back(std::move(k));
        }
    fp::DenseEchelon sum(F, rep.module_dim);
    for (const auto& k : kernels)
        for (const auto& v : k)
            if (sum.insert(v)) rep.basis.push_back(v);
    rep.torsion_dim = sum.rank();
    rep.union_is_subspace = rep.torsion_dim == 0;
    for (const auto& k : kernels)
        if (k.size() == rep.torsion_dim) rep.union_is_subspace = true;
    return rep;
}

// -- the complex Sigma_{I,n} ----------------------------------------------------

struct SigmaComplex {
    ClassLabel object;
    FactorMask I = 0;
    std::size_t n_max = 0;
    std::vector<std::size_t> hom_sizes;  // |Hom(X_I^n, V)|
    std::vector<std::size_t> dims;       // dim Sigma_n, with Sigma_0 = M(V)
    std::vector<LinearMap> d;            // d[n]: Sigma_n -> Sigma_{n-1}, d[0] unused
    std::vector<std::size_t> ranks;      // rank d[n]
    bool dd_zero = true;
    std::vector<std::size_t> homology;   // at Sigma_j for j = 0 .. n_max - 1

    bool exact_low() const {
        for (std::size_t j = 0; j < homology.size() && j < 2; ++j)
            if (homology[j]) return false;
        return true;
    }
};

inline OrthForm power_form(const RingPtr& ring, FactorMask I, std::size_t n) {
    const Elem x = ring->nonsquare_unit(I);
    std::vector<Elem> d(n, x);
    return OrthForm::validate(ring, Matrix::diagonal(d));
}

inline SigmaComplex sigma_complex(const Module& M, FactorMask I, std::size_t n_max, const ClassLabel& V) {
    const auto& F = M.field();
    const auto& S = M.skeleton();
    const RingPtr& ring = S.ring();
    const Ring& R = *ring;
    const OrthForm VF = S.rep(V);
    SigmaComplex sc;
    sc.object = V;
    sc.I = I;
    sc.n_max = n_max;

    struct Summand {
        Matrix h;
        Matrix iota;  // rep(C_h) -> V
        ClassLabel label;
        std::size_t offset = 0;
    };
    std::vector<std::vector<Summand>> level(n_max + 1);
    std::vector<std::unordered_map<Matrix, std::size_t, MatrixHash>> where(n_max + 1);
    for (std::size_t n = 0; n <= n_max; ++n) {
        std::vector<Matrix> homs;
        if (n == 0)
            homs.push_back(Matrix(V.rank, 0));
        else if (n <= V.rank)
            homs = enumerate_isometries(power_form(ring, I, n), VF, S.options());
        std::size_t off = 0;
        for (auto& h : homs) {
            Summand s;
            if (n == 0) {
                s.iota = Matrix::identity(R, V.rank);
                s.label = V;
            } else {
                auto c = orthogonal_complement(VF, h);
                s.label = c.form.rank() ? canonical_form(c.form).label : ClassLabel{0, 0};
                s.iota = c.form.rank() ? mul(R, c.embedding, Skeleton::rep_iso(c.form)) : Matrix(V.rank, 0);
            }
            s.h = std::move(h);
            s.offset = off;
            off += M.dim(s.label);
            where[n].emplace(s.h, level[n].size());
            level[n].push_back(std::move(s));
        }
        sc.hom_sizes.push_back(level[n].size());
        sc.dims.push_back(off);
    }

    sc.d.resize(n_max + 1);
    sc.ranks.assign(n_max + 1, 0);
    for (std::size_t n = 1; n <= n_max; ++n) {
        LinearMap d{sc.dims[n - 1], sc.dims[n], std::vector<fp::Sparse>(sc.dims[n])};
        for (const auto& s : level[n]) {
            const std::size_t dim_s = M.dim(s.label);
            std::vector<std::vector<std::pair<std::uint32_t, fp::Scalar>>> acc(dim_s);
            for (std::size_t i = 0; i < n; ++i) {
                std::vector<std::size_t> keep;
                for (std::size_t c = 0; c < n; ++c)
                    if (c != i) keep.push_back(c);
                const Matrix hp = s.h.select_columns(keep);
                const auto it = where[n - 1].find(hp);
                if (it == where[n - 1].end()) throw InternalError("face of an embedding is missing");
                const Summand& t = level[n - 1][it->second];
                // the inclusion C_h -> C_h' in representative coordinates
                Matrix j(t.label.rank, s.label.rank);
                if (s.label.rank) {
                    const Matrix Bt = OrthForm::standard(ring, t.label).gram;
                    j = mul(R, inverse(R, Bt), mul(R, mul(R, t.iota.transpose(), VF.gram), s.iota));
                }
                const LinearMap a = M.act(s.label, t.label, j);
                const fp::Scalar sign = (i % 2 == 0) ? 1 : F.neg(1);
                for (std::size_t b = 0; b < dim_s; ++b)
                    for (auto [r, x] : a.columns[b]) acc[b].emplace_back(static_cast<std::uint32_t>(t.offset + r), F.mul(sign, x));
            }
            for (std::size_t b = 0; b < dim_s; ++b) d.columns[s.offset + b] = fp::normalize(F, std::move(acc[b]));
        }
        sc.ranks[n] = d.rank(F);
        sc.d[n] = std::move(d);
    }
    for (std::size_t n = 2; n <= n_max; ++n)
        for (const auto& c : sc.d[n].columns)
            if (!sc.d[n - 1].apply(F, c).empty()) sc.dd_zero = false;
    if (!sc.dd_zero) throw PropertyViolation("d o d != 0 in the Sigma complex");
    for (std::size_t j = 0; j < n_max; ++j) sc.homology.push_back(sc.dims[j] - sc.ranks[j] - sc.ranks[j + 1]);
    return sc;
}

// -- Kan extension from objects of rank < N plus the rank-N identity ------------

struct KanReport {
    ClassLabel object;
    std::size_t N = 0;
    std::size_t pairs = 0;        // objects (U, f) of the comma category
    std::size_t total_dim = 0;    // sum of dim M(U) over pairs
    std::size_t relations = 0;    // relations processed
    std::size_t colimit_dim = 0;
    std::size_t target_dim = 0;   // dim M(V)
    std::size_t comparison_rank = 0;
    bool iso() const { return colimit_dim == target_dim && comparison_rank == target_dim; }
};

inline std::vector<ClassLabel> kan_objects(const Ring& R, std::size_t N) {
    std::vector<ClassLabel> out;
    for (std::size_t r = 0; r + 1 <= N; ++r)
        for (const auto& l : labels_of_rank(R, r)) out.push_back(l);
    out.push_back({N, 0});
    return out;
}

inline KanReport kan_extend(const Module& M, std::size_t N, const ClassLabel& V, std::uint64_t budget = 50'000'000) {
    if (N == 0) throw UsageError("Kan extension needs N >= 1");
    const auto& F = M.field();
    const auto& S = M.skeleton();
    const Ring& R = *S.ring();
    KanReport rep;
    rep.object = V;
    rep.N = N;
    rep.target_dim = M.dim(V);
    const auto objs = kan_objects(R, N);
    // larger objects get larger column indices, so each relation rewrites a
    // smaller-object generator in terms of a larger one
    std::vector<std::size_t> offset(objs.size());
    std::size_t total = 0;
    for (std::size_t a = 0; a < objs.size(); ++a) {
        offset[a] = total;
        const std::size_t k = S.hom(objs[a], V).size();
        rep.pairs += k;
        total += k * M.dim(objs[a]);
    }
    rep.total_dim = total;

    fp::RankCounter comp(F, rep.target_dim);
    for (std::size_t a = 0; a < objs.size() && comp.rank() < rep.target_dim; ++a)
        for (const Matrix& f : S.hom(objs[a], V).maps) {
            for (const auto& c : M.act(objs[a], V, f).columns) comp.insert(c);
            if (comp.rank() == rep.target_dim) break;
        }
    rep.comparison_rank = comp.rank();

    // relations lie in the kernel of the comparison map, so rank(rel) <= total - comparison_rank
    const std::size_t max_rank = total - rep.comparison_rank;
    fp::SparseEchelon rel(F);
    std::uint64_t spent = 0;
    for (std::size_t b = objs.size(); b-- > 0 && rel.rank() < max_rank;) {
        const ClassLabel& Up = objs[b];
        const HomSet& into_v = S.hom(Up, V);
        for (std::size_t a = 0; a < objs.size() && rel.rank() < max_rank; ++a) {
            const ClassLabel& U = objs[a];
            const std::size_t du = M.dim(U);
            if (du == 0) continue;
            const HomSet& uv = S.hom(U, V);
            for (const Matrix& u : S.hom(U, Up).maps) {
                const LinearMap Mu = M.act(U, Up, u);
                for (std::uint32_t fi = 0; fi < into_v.size(); ++fi) {
                    const std::uint32_t gi = uv.at(mul(R, into_v.maps[fi], u));
                    for (std::size_t x = 0; x < du; ++x) {
                        if (++spent > budget) throw BudgetExceeded("Kan extension relations exceed " + std::to_string(budget));
                        std::vector<std::pair<std::uint32_t, fp::Scalar>> acc;
                        acc.emplace_back(static_cast<std::uint32_t>(offset[a] + gi * du + x), 1);
                        const std::size_t dup = M.dim(Up);
                        for (auto [y, c] : Mu.columns[x])
                            acc.emplace_back(static_cast<std::uint32_t>(offset[b] + fi * dup + y), F.neg(c));
                        rel.insert(fp::normalize(F, std::move(acc)));
                        ++rep.relations;
                        if (rel.rank() == max_rank) break;
                    }
                    if (rel.rank() == max_rank) break;
                }
                if (rel.rank() == max_rank) break;
            }
        }
    }
    rep.colimit_dim = total - rel.rank();
    return rep;
}

// -- stability sweeps -------------------------------------------------------------

struct StabilityRow {
    ClassLabel source, target;
    std::size_t dim_source = 0, dim_target = 0;
    bool injective = false;
    bool spans = false;  // Aut(W)-span of the image is all of M(W)
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    std::optional<std::size_t> injective_onset, surjective_onset;
};

/// For every pair V -> W of representatives with rank V < rank W <= horizon.
/// An onset is the least rank r such that the property holds for all sources of
/// rank >= r in the window.
inline StabilityReport stability_sweep(const Module& M) {
    const auto& F = M.field();
    const auto& S = M.skeleton();
    StabilityReport rep;
    const std::size_t H = S.horizon();
    std::vector<char> inj_ok(H + 1, 1), surj_ok(H + 1, 1);
    for (std::size_t r = 0; r < H; ++r)
        for (const auto& V : S.objects(r))
            for (std::size_t t = r + 1; t <= H; ++t)
                for (const auto& W : S.objects(t)) {
                    StabilityRow row{V, W, M.dim(V), M.dim(W)};
                    const Matrix f = standard_embedding(S.rep(V), S.rep(W));
                    row.injective = M.act(V, W, f).rank(F) == row.dim_source;
                    fp::RankCounter span(F, row.dim_target);
                    for (const Matrix& h : S.hom(V, W).maps) {
                        for (const auto& c : M.act(V, W, h).columns) span.insert(c);
                        if (span.rank() == row.dim_target) break;
                    }
                    row.spans = span.rank() == row.dim_target;
                    if (!row.injective) inj_ok[r] = 0;
                    if (!row.spans) surj_ok[r] = 0;
                    rep.rows.push_back(row);
                }
    auto onset = [&](const std::vector<char>& ok) -> std::optional<std::size_t> {
        if (H == 0) return std::nullopt;
        std::optional<std::size_t> o;
        for (std::size_t r = H; r-- > 0;) {
            if (!ok[r]) break;
            o = r;
        }
        return o;
    };
    rep.injective_onset = onset(inj_ok);
    rep.surjective_onset = onset(surj_ok);
    return rep;
}

/// First rank r (within the window) from which Sigma_2 -> Sigma_1 -> M -> 0 is
/// exact at every scanned representative of rank >= r. With identity_only the
/// scan visits the identity forms X^r alone.
struct SigmaScan {
    std::vector<SigmaComplex> complexes;
    std::optional<std::size_t> first_exact_rank;
};

inline SigmaScan sigma_scan(const Module& M, FactorMask I, std::size_t max_rank, bool identity_only = false) {
    SigmaScan scan;
    const auto& S = M.skeleton();
    std::vector<char> ok(max_rank + 1, 1);
    for (std::size_t r = 0; r <= max_rank; ++r)
        for (const auto& V : S.objects(r)) {
            if (identity_only && V.nonsquare) continue;
            scan.complexes.push_back(sigma_complex(M, I, 2, V));
            if (!scan.complexes.back().exact_low()) ok[r] = 0;
        }
    for (std::size_t r = max_rank + 1; r-- > 0;) {
        if (!ok[r]) break;
        scan.first_exact_rank = r;
    }
    return scan;
}

}  // namespace orthstab
