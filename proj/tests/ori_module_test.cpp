#include <gtest/gtest.h>

#include <random>

#include "orthstab/init_terms.hpp"
#include "orthstab/ori_module.hpp"

using namespace orthstab;

namespace {

const ClassLabel kX{1, 0}, kY{1, 1};

Matrix column(std::initializer_list<Elem> v) {
    Matrix m(v.size(), 1);
    std::size_t i = 0;
    for (auto e : v) m(i++, 0) = e;
    return m;
}

// generator at X killed along X -> X^2 and X -> X + Y
ModulePresentation torsion_fixture(std::uint32_t ell) {
    auto R = Ring::gf(3);
    ModulePresentation p{R, ell, 3, {{kX, "t"}}, {}};
    p.relations.push_back({{2, 0}, {{0, column({1, 0}), 1}}});
    p.relations.push_back({{2, 1}, {{0, column({1, 0}), 1}}});
    return p;
}

// K[Hom(X, -)] modulo e_h + e_{-h}
ModulePresentation sign_fixture(std::uint32_t ell) {
    auto R = Ring::gf(3);
    ModulePresentation p{R, ell, 3, {{kX, "s"}}, {}};
    p.relations.push_back({kX, {{0, column({1}), 1}, {0, column({2}), 1}}});
    return p;
}

std::vector<ModulePresentation> fixtures() {
    auto R = Ring::gf(3);
    return {ModulePresentation::representable(R, 2, 3, kX), ModulePresentation::representable(R, 5, 3, {2, 0}),
            ModulePresentation::constant(R, 3, 3), torsion_fixture(2), sign_fixture(5), sign_fixture(2)};
}

std::vector<ClassLabel> all_objects(const Skeleton& S) {
    std::vector<ClassLabel> out;
    for (std::size_t r = 0; r <= S.horizon(); ++r)
        for (const auto& l : S.objects(r)) out.push_back(l);
    return out;
}

}  // namespace

TEST(OriModule, RepresentableDimensions) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 3, 3, kX));
    EXPECT_EQ(P.dim({2, 0}), 4u);
    EXPECT_EQ(P.dim(kX), 2u);
    EXPECT_EQ(P.dim({0, 0}), 0u);
    for (const auto& V : all_objects(P.skeleton()))
        EXPECT_EQ(P.dim(V), count_isometries(OrthForm::standard(R, kX), OrthForm::standard(R, V))) << V.to_string();
    EXPECT_THROW(P.dim({4, 0}), DomainError);
}

TEST(OriModule, ActionIdentityAndYoneda) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 2, 3, kX));
    const ClassLabel V{2, 0}, W{3, 1};
    EXPECT_EQ(P.act(V, V, Matrix::identity(*R, 2)), LinearMap::identity(4));
    const auto& S = P.skeleton();
    for (const Matrix& f : S.hom(V, W).maps) {
        auto a = P.act(V, W, f);
        for (std::uint32_t b = 0; b < a.cols; ++b) {
            ASSERT_EQ(a.columns[b].size(), 1u);
            const Matrix img = mul(*R, f, S.hom(kX, V).maps[b]);
            EXPECT_EQ(a.columns[b][0], (std::pair<std::uint32_t, fp::Scalar>{S.hom(kX, W).at(img), 1}));
        }
    }
}

TEST(OriModule, QuotientDimensions) {
    Module s5(sign_fixture(5)), s2(sign_fixture(2));
    auto R = Ring::gf(3);
    for (const auto& V : all_objects(s5.skeleton())) {
        const auto h = count_isometries(OrthForm::standard(R, kX), OrthForm::standard(R, V));
        EXPECT_EQ(s5.dim(V), h / 2);
        EXPECT_EQ(s2.dim(V), h / 2);
    }
    Module t(torsion_fixture(2));
    EXPECT_EQ(t.dim(kX), 2u);
    EXPECT_EQ(t.dim(kY), 0u);
    for (std::size_t r = 2; r <= 3; ++r)
        for (const auto& V : t.skeleton().objects(r)) EXPECT_EQ(t.dim(V), 0u);
}

TEST(OriModuleProperty, Functoriality) {
    std::mt19937_64 rng(5);
    for (const auto& p : fixtures()) {
        Module M(p);
        const auto& S = M.skeleton();
        const auto objs = all_objects(S);
        std::size_t checked = 0;
        for (int t = 0; t < 5000 && checked < 100; ++t) {
            const auto& U = objs[rng() % objs.size()];
            const auto& V = objs[rng() % objs.size()];
            const auto& W = objs[rng() % objs.size()];
            const auto& f = S.hom(U, V).maps;
            const auto& g = S.hom(V, W).maps;
            if (f.empty() || g.empty()) continue;
            const Matrix& a = f[rng() % f.size()];
            const Matrix& b = g[rng() % g.size()];
            ASSERT_EQ(M.act(U, W, mul(*p.ring, b, a)), compose(M.field(), M.act(V, W, b), M.act(U, V, a)));
            ++checked;
        }
        EXPECT_EQ(checked, 100u);
    }
}

TEST(OriModule, Torsion) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 2, 3, kX));
    for (const auto& V : all_objects(P.skeleton())) EXPECT_EQ(torsion(P, V, 3).torsion_dim, 0u);
    Module T(torsion_fixture(2));
    auto t1 = torsion(T, kX, 3);
    EXPECT_EQ(t1.module_dim, 2u);
    EXPECT_EQ(t1.torsion_dim, 2u);
    EXPECT_TRUE(t1.union_is_subspace);
    EXPECT_EQ(torsion(T, kX, 1).torsion_dim, 0u);  // no probe of higher rank
    for (std::size_t r = 2; r <= 3; ++r)
        for (const auto& V : T.skeleton().objects(r)) EXPECT_EQ(torsion(T, V, 3).torsion_dim, 0u);
    // killing only X -> X^2 leaves torsion at X through that map alone
    auto p = torsion_fixture(5);
    p.relations.pop_back();
    Module T2(p);
    auto t2 = torsion(T2, kX, 2);
    EXPECT_EQ(t2.torsion_dim, 2u);
    EXPECT_GT(T2.dim({2, 1}), 0u);
}

TEST(OriModule, SigmaComplexRepresentable) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 3, 4, kX));
    auto sc = sigma_complex(P, 0, 3, {3, 0});
    EXPECT_TRUE(sc.dd_zero);
    EXPECT_EQ(sc.dims[0], 6u);
    EXPECT_EQ(sc.hom_sizes[1], 6u);
    EXPECT_EQ(sc.dims[1], 24u);  // six complements X^2, each with |Hom(X, X^2)| = 4
    EXPECT_EQ(sc.homology[0], 0u);
    EXPECT_EQ(sc.homology[1], 0u);
    // at X^2 there is no Sigma_2 and d_1 maps 8 onto 4 dimensions, so H_1 = 4
    auto scan = sigma_scan(P, 0, 4, true);
    ASSERT_TRUE(scan.first_exact_rank.has_value());
    EXPECT_EQ(*scan.first_exact_rank, 3u);
    EXPECT_EQ(scan.complexes[2].homology[1], 4u);
    for (const auto& c : scan.complexes) EXPECT_TRUE(c.dd_zero);
}

TEST(OriModule, SigmaComplexEmptyHom) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 2, 3, kX));
    // no isometry Y -> X
    auto sc = sigma_complex(P, 1, 2, kX);
    EXPECT_EQ(sc.dims[1], 0u);
    EXPECT_EQ(sc.homology[0], P.dim(kX));
}

TEST(OriModule, SigmaDdZeroOnFixtures) {
    for (const auto& p : fixtures()) {
        Module M(p);
        for (FactorMask I : {0u, 1u})
            for (const auto& V : all_objects(M.skeleton())) {
                auto sc = sigma_complex(M, I, 3, V);
                EXPECT_TRUE(sc.dd_zero);
            }
    }
}

// For the constant module, Sigma_1 -> Sigma_0 = K has kernel modulo the image of
// Sigma_2 equal to (components - 1) of the graph on vectors of norm x_I with
// edges between orthogonal pairs.
std::size_t orthogonality_components(const OrthForm& V, Elem norm) {
    const Ring& R = *V.ring;
    std::vector<std::vector<Elem>> vs;
    const std::size_t n = V.rank();
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) total *= R.size();
    for (std::uint64_t c = 0; c < total; ++c) {
        std::vector<Elem> v(n);
        std::uint64_t x = c;
        for (auto& e : v) e = static_cast<Elem>(x % R.size()), x /= R.size();
        if (dot(R, v, V.gram, v) == norm) vs.push_back(v);
    }
    std::vector<int> comp(vs.size(), -1);
    int count = 0;
    for (std::size_t s = 0; s < vs.size(); ++s) {
        if (comp[s] >= 0) continue;
        std::vector<std::size_t> stack{s};
        comp[s] = count;
        while (!stack.empty()) {
            auto a = stack.back();
            stack.pop_back();
            for (std::size_t b = 0; b < vs.size(); ++b)
                if (comp[b] < 0 && dot(R, vs[a], V.gram, vs[b]) == 0) comp[b] = count, stack.push_back(b);
        }
        ++count;
    }
    return static_cast<std::size_t>(count);
}

TEST(OriModule, SigmaConstantMatchesGraphComponents) {
    auto R = Ring::gf(3);
    Module K(ModulePresentation::constant(R, 5, 4));
    for (std::size_t r = 1; r <= 4; ++r)
        for (const auto& V : K.skeleton().objects(r))
            for (FactorMask I : {0u, 1u}) {
                auto sc = sigma_complex(K, I, 2, V);
                const std::size_t c = orthogonality_components(OrthForm::standard(R, V), R->nonsquare_unit(I));
                EXPECT_EQ(sc.homology[0], c == 0 ? 1u : 0u);
                EXPECT_EQ(sc.homology[1], c == 0 ? 0u : c - 1) << V.to_string() << " I=" << I;
            }
}

TEST(OriModule, KanExtension) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 3, 3, kX));
    for (const ClassLabel V : {ClassLabel{0, 0}, kX, kY, ClassLabel{2, 0}}) {
        auto k = kan_extend(P, 2, V);
        EXPECT_TRUE(k.iso()) << V.to_string();
    }
    auto k3 = kan_extend(P, 2, {3, 0});
    EXPECT_EQ(k3.target_dim, 6u);
    EXPECT_GT(k3.pairs, 0u);
    Module zero(ModulePresentation{R, 3, 3, {}, {}});
    auto kz = kan_extend(zero, 1, {3, 0});
    EXPECT_EQ(kz.colimit_dim, 0u);
    EXPECT_EQ(kz.target_dim, 0u);
}

TEST(OriModule, StabilitySweep) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 2, 3, kX));
    auto s = stability_sweep(P);
    ASSERT_TRUE(s.injective_onset.has_value());
    EXPECT_EQ(*s.injective_onset, 0u);
    ASSERT_TRUE(s.surjective_onset.has_value());
    // P_X(Y) = 0 while P_X(X + Y) != 0, so rank-1 sources fail
    EXPECT_EQ(*s.surjective_onset, 2u);
}

TEST(InitTerms, Examples) {
    auto R = Ring::gf(3);
    QUniverse Q(R, Matrix::identity(*R, 1), 5, 3);
    ASSERT_GE(Q.keys(2).keys.size(), 2u);
    EXPECT_EQ(init_term({2, {{1, 3}}}), (std::pair<std::uint32_t, fp::Scalar>{1, 3}));
    EXPECT_EQ(init_term({2, {{0, 1}, {1, 1}}}).first, 1u);
    EXPECT_THROW(init_term({2, {}}), DomainError);
}

TEST(InitTerms, StableUnderSmallerTerms) {
    auto R = Ring::gf(3);
    QUniverse Q(R, Matrix::diagonal({2}), 5, 3);
    const auto& F = Q.field();
    std::mt19937_64 rng(9);
    const std::size_t K = Q.keys(3).keys.size();
    ASSERT_GT(K, 3u);
    for (int t = 0; t < 300; ++t) {
        const std::uint32_t top = 1 + static_cast<std::uint32_t>(rng() % (K - 1));
        const fp::Scalar c = 1 + static_cast<fp::Scalar>(rng() % 4);
        std::vector<std::pair<std::uint32_t, fp::Scalar>> acc{{top, c}};
        for (int j = 0; j < 4; ++j) acc.emplace_back(static_cast<std::uint32_t>(rng() % top), static_cast<fp::Scalar>(rng() % 5));
        QElement x{3, fp::normalize(F, acc)};
        auto it = init_term(x);
        EXPECT_EQ(it.first, top);
        EXPECT_EQ(it.second, c);
        // direct comparison against the total order
        for (auto [k, v] : x.coeffs)
            if (k != top) EXPECT_TRUE(total_less(Q.keys(3).keys[k], Q.keys(3).keys[top]));
    }
}

TEST(InitTerms, Separation) {
    auto R = Ring::gf(3);
    QUniverse Q(R, Matrix::identity(*R, 1), 2, 3);
    const QElement x{2, {{0, 1}}}, y{2, {{1, 1}}};
    auto w = init_separates(Q, {x}, {x, y});
    EXPECT_EQ(w.n, 2u);
    auto z = init_separates(Q, {}, {x});
    EXPECT_EQ(z.dims_sub[2], 0u);
    EXPECT_THROW(init_separates(Q, {x}, {x}), DomainError);
    EXPECT_THROW(init_separates(Q, {y}, {x}), DomainError);  // not a submodule
}

TEST(InitTerms, FuzzNoViolations) {
    auto rep = fuzz_init_separation(Ring::gf(3), {2, 5}, 50, 3, 2024);
    EXPECT_EQ(rep.instances, 50u);
    EXPECT_EQ(rep.witnesses, 50u);
    EXPECT_EQ(rep.violations, 0u);
}
