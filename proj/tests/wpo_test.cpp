#include <gtest/gtest.h>

#include <map>
#include <set>

#include "orthstab/wpo.hpp"

using namespace orthstab;

namespace {

Matrix mat(std::initializer_list<std::initializer_list<Elem>> rows) {
    Matrix m(rows.size(), rows.begin()->size());
    std::size_t r = 0;
    for (auto& row : rows) {
        std::size_t c = 0;
        for (auto e : row) m(r, c++) = e;
        ++r;
    }
    return m;
}

struct ToyInstance {
    RingPtr R = Ring::gf(5);
    MorphismKey f, g;
    ToyInstance()
        : f(MorphismKey::make(R, Matrix::diagonal({2, 1, 1}), mat({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}))),
          g(MorphismKey::make(R, Matrix::diagonal({2, 1, 1}),
                              mat({{1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 2, 0}, {0, 0, 1}, {2, 4, 0}}))) {}
};

std::vector<MorphismKey> all_keys(const RingPtr& R, const Matrix& B, std::size_t max_n) {
    std::vector<MorphismKey> out;
    for (std::size_t n = B.rows; n <= max_n; ++n)
        for (auto& k : enumerate_keys(R, B, n)) out.push_back(std::move(k));
    return out;
}

}  // namespace

TEST(Wpo, ToyPrecedes) {
    ToyInstance t;
    EXPECT_TRUE(precedes(t.f, t.g));
    EXPECT_FALSE(precedes(t.g, t.f));
    EXPECT_TRUE(precedes(t.f, t.f));
    auto del = find_deletion(*t.R, t.f.matrix, t.g.matrix);
    EXPECT_EQ((*del)[0], (std::vector<std::size_t>{3, 5}));
}

TEST(Wpo, ToyTotalOrder) {
    ToyInstance t;
    EXPECT_TRUE(total_less(t.f, t.g));
    EXPECT_EQ(total_compare(t.f, t.f), std::strong_ordering::equal);
}

TEST(Wpo, ToyWord) {
    ToyInstance t;
    auto w = word_embed(t.f);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0], (Word{-1, 25, -1, -1}));  // row (1,0,0) has code 1*25
    auto id = MorphismKey::make(Ring::gf(3), Matrix::identity(*Ring::gf(3), 2), Matrix::identity(*Ring::gf(3), 2));
    EXPECT_EQ(word_embed(id)[0], (Word{-1, -1}));
}

TEST(Wpo, ToyCompat) {
    ToyInstance t;
    auto rep = check_order_compat(t.f, t.g);
    EXPECT_TRUE(rep.ok());
    EXPECT_GT(rep.smaller_checked, 0u);
    auto self = check_order_compat(t.f, t.f);
    EXPECT_EQ(self.phi, Matrix::identity(*t.R, 4));
    EXPECT_TRUE(self.ok());
}

TEST(Wpo, RankComparisons) {
    auto R = Ring::gf(3);
    auto B = Matrix::identity(*R, 1);
    auto small = MorphismKey::make(R, B, mat({{1}, {0}}));
    auto big = MorphismKey::make(R, B, mat({{1}, {0}, {0}}));
    EXPECT_FALSE(precedes(big, small));
    EXPECT_TRUE(precedes(small, big));
    // two rank-2 keys differing only in one non-pivot row
    auto a = MorphismKey::make(R, Matrix::diagonal({2}), mat({{1}, {1}}));
    auto b = MorphismKey::make(R, Matrix::diagonal({2}), mat({{1}, {2}}));
    EXPECT_TRUE(total_less(a, b));
    EXPECT_FALSE(total_less(b, a));
    EXPECT_THROW(precedes(a, small), UsageError);
}

TEST(Wpo, KeysRejectNonAdapted) {
    auto R = Ring::gf(3);
    EXPECT_THROW(MorphismKey::make(R, Matrix::identity(*R, 1), mat({{0}, {2}})), DomainError);
    EXPECT_THROW(MorphismKey::make(R, Matrix::identity(*R, 1), mat({{1}, {1}})), DomainError);
}

// Order axioms on a smaller enumeration; the acceptance binary runs d <= 2, n <= 4.
TEST(WpoProperty, OrderAxiomsSmall) {
    auto R = Ring::gf(3);
    for (const auto& B : {Matrix::identity(*R, 1), Matrix::diagonal({2}), Matrix::identity(*R, 2)}) {
        auto keys = all_keys(R, B, 3);
        const std::size_t N = keys.size();
        std::vector<std::vector<char>> rel(N, std::vector<char>(N));
        for (std::size_t i = 0; i < N; ++i)
            for (std::size_t j = 0; j < N; ++j) rel[i][j] = precedes(keys[i], keys[j]);
        std::set<std::vector<Word>> words;
        for (std::size_t i = 0; i < N; ++i) {
            ASSERT_TRUE(rel[i][i]);
            words.insert(word_embed(keys[i]));
            for (std::size_t j = 0; j < N; ++j) {
                if (i != j) ASSERT_FALSE(rel[i][j] && rel[j][i]);
                if (rel[i][j] && i != j) ASSERT_TRUE(total_less(keys[i], keys[j]));
                if (rel[i][j]) ASSERT_TRUE(word_subsequence(word_embed(keys[i])[0], word_embed(keys[j])[0]));
                for (std::size_t k = 0; k < N; ++k)
                    if (rel[i][j] && rel[j][k]) ASSERT_TRUE(rel[i][k]);
            }
        }
        EXPECT_EQ(words.size(), N);
    }
}

TEST(WpoProperty, ProductRingOrder) {
    auto R = Ring::zmod(15);
    auto keys = all_keys(R, Matrix::identity(*R, 1), 2);
    ASSERT_FALSE(keys.empty());
    for (const auto& a : keys)
        for (const auto& b : keys) {
            const bool p = precedes(a, b);
            bool every = a.n() <= b.n();
            for (std::size_t i = 0; i < 2 && every; ++i) {
                auto da = local::find_deletion(project(*R, a.matrix, i), project(*R, b.matrix, i), b.rows.pivots[i]);
                every = da.has_value();
            }
            EXPECT_EQ(p, every);
            if (p && &a != &b) {
                auto rep = check_order_compat(a, b);
                EXPECT_TRUE(rep.ok());
            }
        }
}
