#include <gtest/gtest.h>

#include <numeric>

#include "orthstab/homology.hpp"

using namespace orthstab;

namespace {

std::shared_ptr<const GroupTable> orth_table(const RingPtr& R, ClassLabel V) {
    auto G = std::make_shared<const OrthGroup>(OrthGroup::build(OrthForm::standard(R, V)));
    return std::make_shared<const GroupTable>(GroupTable::from_orth(G));
}

// dim Hom(G, Z/l) by brute force over assignments on a generating set, extended
// along products and checked against the full multiplication table.
std::size_t hom_to_cyclic_dim(const OrthGroup& G, std::uint32_t ell) {
    const std::size_t n = G.order();
    const auto table = G.multiplication_table();
    // generating set found independently: all elements, pruned greedily by order
    std::vector<std::uint32_t> gens;
    std::vector<char> in(n, 0);
    in[0] = 1;
    for (std::uint32_t c = 0; c < n; ++c) {
        if (in[c]) continue;
        gens.push_back(c);
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::uint32_t a = 0; a < n; ++a)
                if (in[a])
                    for (auto s : gens)
                        if (!in[table[a * n + s]]) in[table[a * n + s]] = 1, grew = true;
        }
    }
    std::size_t count = 0, total = 1;
    for (std::size_t i = 0; i < gens.size(); ++i) total *= ell;
    for (std::size_t code = 0; code < total; ++code) {
        std::vector<int> f(n, -1);
        f[0] = 0;
        std::size_t c = code;
        std::vector<int> fs;
        for (std::size_t i = 0; i < gens.size(); ++i) fs.push_back(static_cast<int>(c % ell)), c /= ell;
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::uint32_t a = 0; a < n; ++a)
                if (f[a] >= 0)
                    for (std::size_t i = 0; i < gens.size(); ++i) {
                        const auto b = table[a * n + gens[i]];
                        if (f[b] < 0) f[b] = (f[a] + fs[i]) % static_cast<int>(ell), changed = true;
                    }
        }
        bool ok = true;
        for (std::uint32_t a = 0; a < n && ok; ++a)
            for (std::uint32_t b = 0; b < n && ok; ++b)
                ok = f[table[a * n + b]] == (f[a] + f[b]) % static_cast<int>(ell);
        count += ok;
    }
    std::size_t d = 0;
    while (count > 1) count /= ell, ++d;
    return d;
}

}  // namespace

TEST(GroupTable, GeneratorsAndTree) {
    auto R = Ring::gf(3);
    for (ClassLabel V : {ClassLabel{1, 0}, {2, 0}, {2, 1}, {3, 0}}) {
        auto T = orth_table(R, V);
        for (std::uint32_t g = 0; g < T->order(); ++g) {
            EXPECT_EQ(T->mul(g, T->inv(g)), 0u);
            if (g) EXPECT_EQ(T->right(T->parent(g), static_cast<std::size_t>(T->parent_gen(g))), g);
        }
        EXPECT_LE(T->num_generators(), 4u);
    }
}

TEST(Homology, CyclicTrivialCoefficients) {
    for (std::size_t n : {1u, 2u, 3u, 4u, 6u})
        for (std::uint32_t ell : {2u, 3u}) {
            auto T = std::make_shared<const GroupTable>(GroupTable::cyclic(n));
            auto h = homology_dims(trivial_rep(T, ell), 2);
            const std::size_t want = n % ell == 0 ? 1 : 0;
            EXPECT_EQ(h.dims, (std::vector<std::size_t>{1, want, want})) << n << " " << ell;
        }
}

TEST(Homology, TrivialGroup) {
    auto T = std::make_shared<const GroupTable>(GroupTable::cyclic(1));
    auto h = homology_dims(trivial_rep(T, 5, 3), 2);
    EXPECT_EQ(h.dims, (std::vector<std::size_t>{3, 0, 0}));
}

TEST(Homology, O1WithEvenCoefficients) {
    auto T = orth_table(Ring::gf(3), {1, 0});
    ASSERT_EQ(T->order(), 2u);
    EXPECT_EQ(homology_dims(trivial_rep(T, 2), 2).dims, (std::vector<std::size_t>{1, 1, 1}));
}

TEST(Homology, DihedralEight) {
    // x^2 + y^2 is anisotropic over GF(3): O_2 is dihedral of order 8
    auto T = orth_table(Ring::gf(3), {2, 0});
    ASSERT_EQ(T->order(), 8u);
    EXPECT_EQ(homology_dims(trivial_rep(T, 2), 2).dims, (std::vector<std::size_t>{1, 2, 3}));
    // coprime coefficients: everything above degree 0 vanishes
    EXPECT_EQ(homology_dims(trivial_rep(T, 3), 2).dims, (std::vector<std::size_t>{1, 0, 0}));
}

TEST(Homology, H1MatchesAbelianization) {
    auto R = Ring::gf(3);
    for (ClassLabel V : {ClassLabel{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}})
        for (std::uint32_t ell : {2u, 3u, 5u}) {
            auto G = std::make_shared<const OrthGroup>(OrthGroup::build(OrthForm::standard(R, V)));
            auto T = std::make_shared<const GroupTable>(GroupTable::from_orth(G));
            auto h = homology_dims(trivial_rep(T, ell), 1);
            EXPECT_EQ(h.dims[1], hom_to_cyclic_dim(*G, ell)) << V.rank << "," << V.nonsquare << " l=" << ell;
        }
}

TEST(Homology, CoinvariantsOfRepresentable) {
    // Aut(X^n) is transitive on Hom(X, X^n), so H_0 = 1
    auto R = Ring::gf(3);
    Module M(ModulePresentation::representable(R, 2, 3, {1, 0}));
    for (std::size_t n = 1; n <= 3; ++n) {
        auto mr = module_rep(M, {n, 0});
        auto h = homology_dims(mr.rep, 1);
        EXPECT_EQ(h.dims[0], 1u);
        EXPECT_EQ(h.coinvariants, 1u);
    }
    // norm-one vectors of X + Y form a single orbit
    auto mr = module_rep(M, {2, 1});
    EXPECT_EQ(homology_dims(mr.rep, 0).dims[0], 1u);
}

TEST(Homology, BudgetIsEnforced) {
    auto T = orth_table(Ring::gf(3), {3, 0});
    HomologyOptions opt;
    opt.budget = 1000;
    EXPECT_THROW(homology_dims(trivial_rep(T, 2), 2, opt), BudgetExceeded);
}

TEST(Homology, NonHomomorphismIsRejected) {
    auto T = std::make_shared<const GroupTable>(GroupTable::cyclic(3));
    auto r = trivial_rep(T, 2, 2);
    r.rho[1].columns[0] = {{1, 1}};  // swap on a generator of order 3
    r.rho[1].columns[1] = {{0, 1}};
    EXPECT_THROW(homology_dims(r, 1), PropertyViolation);
}

TEST(Shapiro, SmallInstances) {
    auto R3 = Ring::gf(3);
    for (ClassLabel V : {ClassLabel{0, 0}, {1, 0}, {1, 1}})
        for (ClassLabel W : {ClassLabel{0, 0}, {1, 0}, {1, 1}, {2, 0}})
            for (std::uint32_t ell : {2u, 5u}) {
                auto s = shapiro_check(R3, V, W, 1, ell);
                EXPECT_TRUE(s.agree()) << V.rank << V.nonsquare << " " << W.rank << W.nonsquare << " l=" << ell;
            }
    auto R5 = Ring::gf(5);
    auto s = shapiro_check(R5, {1, 0}, {1, 1}, 1, 2);
    EXPECT_TRUE(s.agree());
    EXPECT_THROW(shapiro_check(R5, {1, 0}, {1, 0}, 1, 5), DomainError);
}

TEST(Stability, ConstantModuleIsStableAtOnce) {
    auto R = Ring::gf(3);
    Module K(ModulePresentation::constant(R, 2, 4));
    auto t = stability_scan(K, "X", 1, 4, 1);
    ASSERT_EQ(t.size(), 2u);
    for (const auto& row : t[0].rows) {
        EXPECT_EQ(row.dim_source, 1u);
        EXPECT_EQ(row.map_rank, 1u);
    }
    EXPECT_EQ(t[0].stable_from, std::optional<std::size_t>(1));
    EXPECT_TRUE(t[0].functorial);
    EXPECT_TRUE(t[1].functorial);
}

TEST(Stability, FamiliesAreFunctorial) {
    auto R = Ring::gf(3);
    Module P(ModulePresentation::representable(R, 2, 4, {1, 0}));
    for (const std::string fam : {"X", "XY", "interleave"}) {
        auto t = stability_scan(P, fam, 1, 3, 1);
        for (const auto& tab : t) {
            EXPECT_TRUE(tab.functorial) << fam << " k=" << tab.k;
            for (const auto& row : tab.rows) EXPECT_LE(row.map_rank, std::min(row.dim_source, row.dim_target));
        }
    }
    EXPECT_THROW(family_steps(R, "Z", 1, 3), UsageError);
}
