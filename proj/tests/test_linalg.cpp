#include <gtest/gtest.h>

#include <random>

#include "slmpc/linalg.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

using namespace slmpc;
using slmpc::testkit::InstanceGenerator;

TEST(Linalg, MatrixProductMatchesHandValues)
{
    const Matrix a{{1, 2}, {3, 4}};
    const Matrix b{{0, 1}, {1, 0}};
    EXPECT_EQ(a * b, (Matrix{{2, 1}, {4, 3}}));
    const Vector x{1.0, -1.0};
    EXPECT_EQ(a * std::span<const double>(x), (Vector{-1.0, -1.0}));
    EXPECT_EQ(a.transpose(), (Matrix{{1, 3}, {2, 4}}));
}

TEST(Linalg, BlockRoundTrip)
{
    Matrix m(4, 5);
    const Matrix b{{1, 2}, {3, 4}};
    m.set_block(1, 2, b);
    EXPECT_EQ(m.block(1, 2, 2, 2), b);
    EXPECT_EQ(m(0, 0), 0.0);
}

TEST(Linalg, GemvAccumulates)
{
    const Matrix a{{1, 2, 3}, {4, 5, 6}};
    Vector y{1.0, 1.0};
    const Vector x{1.0, 0.0, -1.0};
    gemv_acc(a, x, 2.0, y);
    EXPECT_EQ(y, (Vector{-3.0, -3.0}));
    Vector yt(3, 0.0);
    gemv_t_acc(a, Vector{1.0, 1.0}, 1.0, yt);
    EXPECT_EQ(yt, (Vector{5.0, 7.0, 9.0}));
}

TEST(Linalg, CholeskyRejectsIndefinite)
{
    EXPECT_FALSE(Cholesky::factor(Matrix{{1, 2}, {2, 1}}).has_value());
    EXPECT_FALSE(Cholesky::factor(Matrix{{0}}).has_value());
}

TEST(Linalg, LuRejectsSingular)
{
    EXPECT_FALSE(Lu::factor(Matrix{{1, 2}, {2, 4}}).has_value());
}

TEST(LinalgProperty, FactorizationsSolveRandomSystems)
{
    InstanceGenerator gen(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = gen.index(1, 12);
        const Matrix r = gen.matrix(n, n, 1.0);
        Matrix spd = testkit::naive_multiply(r.transpose(), r);
        for (std::size_t i = 0; i < n; ++i) {
            spd(i, i) += 0.5;
        }
        const Vector b = gen.vector(n, 3.0);
        const Vector ref = testkit::gauss_solve(spd, b);

        const auto chol = Cholesky::factor(spd);
        ASSERT_TRUE(chol.has_value());
        EXPECT_LT(max_abs_diff(chol->solve(b), ref), 1e-9);
        EXPECT_GE(chol->condition_estimate(), 1.0);

        const auto lu = Lu::factor(r + Matrix::identity(n) * 3.0);
        ASSERT_TRUE(lu.has_value());
        const Matrix g = r + Matrix::identity(n) * 3.0;
        EXPECT_LT(max_abs_diff(lu->solve(b), testkit::gauss_solve(g, b)), 1e-9);
    }
}

TEST(LinalgProperty, TransposeIsAnInvolutionAndReversesProducts)
{
    InstanceGenerator gen(12);
    for (int trial = 0; trial < 30; ++trial) {
        const Matrix a = gen.matrix(gen.index(1, 6), gen.index(1, 6), 2.0);
        const Matrix b = gen.matrix(a.cols(), gen.index(1, 6), 2.0);
        EXPECT_EQ(a.transpose().transpose(), a);
        EXPECT_LT(max_abs_diff((a * b).transpose(), b.transpose() * a.transpose()), 1e-14);
    }
}
