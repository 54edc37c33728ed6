#include <gtest/gtest.h>

#include "slmpc/condensing.hpp"
#include "slmpc/controller.hpp"
#include "slmpc/errors.hpp"
#include "slmpc/oracle.hpp"
#include "slmpc/sparse_qp.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

using namespace slmpc;
using testkit::InstanceGenerator;
using testkit::InstanceShape;

namespace {

AugmentedModel small_model(const Matrix& A, const Matrix& B, const Matrix& C, const Vector& e)
{
    AugmentedModel aug;
    aug.A_hat = A;
    aug.B_hat = B;
    aug.C_hat = C;
    aug.e_hat = e;
    aug.n_u = B.cols();
    aug.n_x = A.rows() - aug.n_u;
    aug.n_y = C.rows();
    aug.op.x_c.assign(aug.n_x, 0.0);
    aug.op.u_c.assign(aug.n_u, 0.0);
    aug.op.y_c.assign(aug.n_y, 0.0);
    aug.op.xdot_c.assign(aug.n_x, 0.0);
    return aug;
}

// Two states, one input, horizon two, with drift and a nonzero start.
struct TwoStateCase {
    AugmentedModel aug;
    MpcConfig cfg;
    Vector x0;
};

TwoStateCase two_state_case()
{
    InstanceGenerator gen(31);
    TwoStateCase c;
    c.aug = gen.augmented(2, 1, 1, 0.1);
    c.cfg = MpcConfig::with_dims(1, 1, 7.0, 0.5);
    c.cfg.horizon = 2;
    c.cfg.r = add(c.aug.op.y_c, Vector{0.8});
    c.x0 = gen.vector(3, 0.3);
    return c;
}

}  // namespace

// build_prediction_matrices

TEST(PredictionMatrices, SingleStepHorizon)
{
    InstanceGenerator gen(32);
    const AugmentedModel aug = gen.augmented(3, 2, 2, 0.1);
    const PredictionMatrices p = build_prediction_matrices(aug, 1);
    EXPECT_EQ(p.M, aug.B_hat);
    EXPECT_EQ(p.m, aug.e_hat);
    EXPECT_EQ(p.G, aug.C_hat);
}

TEST(PredictionMatrices, IdentityDynamicsAccumulateDrift)
{
    const AugmentedModel aug = small_model(Matrix::identity(2), Matrix{{0}, {1}}, Matrix{{1, 0}}, {1, 0});
    const PredictionMatrices p = build_prediction_matrices(aug, 3);
    EXPECT_EQ(p.m, (Vector{1, 0, 2, 0, 3, 0}));
}

TEST(PredictionMatrices, BlocksAreExplicitPowers)
{
    InstanceGenerator gen(33);
    const AugmentedModel aug = gen.augmented(3, 2, 1, 0.2);
    const std::size_t T = 4, n = aug.n_aug(), nu = aug.n_u;
    const PredictionMatrices p = build_prediction_matrices(aug, T);
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = 0; j < T; ++j) {
            const Matrix expect = i >= j ? testkit::naive_multiply(testkit::matrix_power(aug.A_hat, i - j), aug.B_hat)
                                         : Matrix(n, nu);
            EXPECT_LT(max_abs_diff(p.M.block(i * n, j * nu, n, nu), expect), 1e-13) << i << "," << j;
        }
        Vector acc(n, 0.0);
        for (std::size_t k = 0; k <= i; ++k) {
            acc = add(acc, testkit::matrix_power(aug.A_hat, k) * std::span<const double>(aug.e_hat));
        }
        EXPECT_LT(max_abs_diff(std::span<const double>(p.m).subspan(i * n, n), acc), 1e-13);
    }
}

TEST(PredictionMatrices, ZeroHorizonIsRejected)
{
    InstanceGenerator gen(34);
    EXPECT_THROW(build_prediction_matrices(gen.augmented(2, 1, 1, 0.1), 0), AssemblyError);
}

// build_condensed_qp

TEST(CondensedQp, NoOutputWeightLeavesIncrementPenalty)
{
    TwoStateCase c = two_state_case();
    c.cfg.W_y = Matrix(1, 1);
    const CondensedQp qp = build_condensed_qp(c.aug, c.cfg, c.x0);
    EXPECT_EQ(qp.H, Matrix::identity(2) * 0.5);
    EXPECT_EQ(qp.h, (Vector{0.0, 0.0}));
}

TEST(CondensedQp, UnconstrainedMinimizerSatisfiesStationarity)
{
    const TwoStateCase c = two_state_case();
    const CondensedQp qp = build_condensed_qp(c.aug, c.cfg, c.x0);
    const Vector z = testkit::gauss_solve(qp.H, scaled(qp.h, -1.0));
    Vector grad = qp.H * std::span<const double>(z);
    grad = add(grad, qp.h);
    EXPECT_LE(norm_inf(grad), 1e-8);
}

TEST(CondensedQp, MatchesStageEnumerationOnTwoStateCase)
{
    const TwoStateCase c = two_state_case();
    const CondensedQp qp = build_condensed_qp(c.aug, c.cfg, c.x0);
    const testkit::NaiveCondensed ref = testkit::naive_condense(c.aug, c.cfg, c.x0);
    EXPECT_LT(max_abs_diff(qp.H, ref.H), 1e-10);
    EXPECT_LT(max_abs_diff(qp.h, ref.h), 1e-10);
    EXPECT_NEAR(qp.constant, ref.constant, 1e-10);
}

TEST(CondensedQp, BoundsBecomeBoxAndAccumulationRows)
{
    TwoStateCase c = two_state_case();
    c.cfg.du_min = {-0.1};
    c.cfg.du_max = {0.2};
    c.cfg.u_min = {-1.0};
    c.cfg.u_max = {1.0};
    const CondensedQp qp = build_condensed_qp(c.aug, c.cfg, c.x0);
    EXPECT_EQ(qp.z_l, (Vector{-0.1, -0.1}));
    EXPECT_EQ(qp.z_u, (Vector{0.2, 0.2}));
    ASSERT_EQ(qp.input_rows, 2u);
    EXPECT_EQ(qp.G.row(0)[0], 1.0);
    EXPECT_EQ(qp.G.row(0)[1], 0.0);
    EXPECT_EQ(qp.G.row(1)[1], 1.0);
    // u_prev offset comes from the last block of x0.
    EXPECT_DOUBLE_EQ(qp.g_u[0], 1.0 - c.aug.op.u_c[0] - c.x0[2]);
}

TEST(CondensedQp, WrongStateLengthIsRejected)
{
    const TwoStateCase c = two_state_case();
    EXPECT_THROW(build_condensed_qp(c.aug, c.cfg, Vector{0.0}), AssemblyError);
}

TEST(MpcConfig, RejectsBadWeightsAndBounds)
{
    MpcConfig cfg = MpcConfig::with_dims(1, 1);
    EXPECT_NO_THROW(cfg.validate(1, 1));
    cfg.W_du = Matrix{{0.0}};
    EXPECT_THROW(cfg.validate(1, 1), AssemblyError);
    cfg = MpcConfig::with_dims(1, 1);
    cfg.u_min = {1.0};
    cfg.u_max = {0.0};
    EXPECT_THROW(cfg.validate(1, 1), AssemblyError);
    cfg = MpcConfig::with_dims(1, 1);
    EXPECT_THROW(cfg.validate(2, 1), AssemblyError);
}

TEST(CondensedQpProperty, MatchesStageEnumerationOnRandomInstances)
{
    InstanceGenerator gen(35);
    for (int trial = 0; trial < 20; ++trial) {
        const testkit::MpcInstance inst = gen.instance({});
        const CondensedQp qp = build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug);
        const testkit::NaiveCondensed ref = testkit::naive_condense(inst.aug, inst.cfg, inst.x0_aug);
        const double scale = std::max(1.0, max_abs(ref.H));
        EXPECT_LT(max_abs_diff(qp.H, ref.H), 1e-10 * scale);
        EXPECT_LT(max_abs_diff(qp.h, ref.h), 1e-10 * std::max(1.0, norm_inf(ref.h)));
        EXPECT_TRUE(is_symmetric(qp.H, 1e-10));
        EXPECT_TRUE(Cholesky::factor(qp.H).has_value());
    }
}

TEST(CondensedQpProperty, ReferenceShiftMovesGradientOnly)
{
    InstanceGenerator gen(36);
    for (int trial = 0; trial < 20; ++trial) {
        testkit::MpcInstance inst = gen.instance({});
        const CondensedQp a = build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug);
        inst.cfg.r = add(inst.cfg.r, inst.aug.C_hat * std::span<const double>(gen.vector(inst.aug.n_aug(), 1.0)));
        const CondensedQp b = build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug);
        EXPECT_EQ(a.H, b.H);
        EXPECT_GT(max_abs_diff(a.h, b.h), 0.0);
    }
}

TEST(CondensedQpProperty, CostMatchesStageSimulation)
{
    InstanceGenerator gen(37);
    for (int trial = 0; trial < 20; ++trial) {
        const testkit::MpcInstance inst = gen.instance({});
        const CondensedQp qp = build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug);
        const Vector z = gen.vector(qp.n(), 0.5);
        const double ref = testkit::stage_cost(inst.aug, inst.cfg, inst.x0_aug, z);
        EXPECT_NEAR(qp.mpc_cost(z), ref, 1e-9 * std::max(1.0, std::abs(ref)));
    }
}

// build_sparse_qp

TEST(SparseQp, SingleStageLayout)
{
    TwoStateCase c = two_state_case();
    c.cfg.horizon = 1;
    const SparseQp qp = build_sparse_qp(c.aug, c.cfg, c.x0);
    EXPECT_EQ(qp.n(), 1u + 3u);
    EXPECT_EQ(qp.u_offset(0), 0u);
    EXPECT_EQ(qp.x_offset(0), 1u);
    const DenseQp d = qp.as_dense();
    EXPECT_EQ(d.A_eq.rows(), 3u);
    // X_1 = A x0 + B U_0 + e for U_0 = 0.3
    Vector z(4);
    z[0] = 0.3;
    const Vector x1 = add(add(c.aug.A_hat * std::span<const double>(c.x0), c.aug.B_hat * std::span<const double>(Vector{0.3})),
                          c.aug.e_hat);
    std::copy(x1.begin(), x1.end(), z.begin() + 1);
    EXPECT_LT(norm_inf(qp.equality_residual(z)), 1e-15);
}

TEST(SparseQp, RolloutIsDynamicallyConsistent)
{
    InstanceGenerator gen(38);
    for (int trial = 0; trial < 20; ++trial) {
        const testkit::MpcInstance inst = gen.instance({});
        const SparseQp qp = build_sparse_qp(inst.aug, inst.cfg, inst.x0_aug);
        const Vector z = qp.rollout(gen.vector(inst.cfg.horizon * inst.aug.n_u, 1.0));
        EXPECT_LT(norm_inf(qp.equality_residual(z)), 1e-12);
    }
}

TEST(SparseQp, FirstMoveMatchesCondensedOnTwoStateCase)
{
    TwoStateCase c = two_state_case();
    c.cfg.du_min = {-0.05};
    c.cfg.du_max = {0.05};
    const QpSolution cond = solve_oracle_bruteforce(build_condensed_qp(c.aug, c.cfg, c.x0));
    const QpSolution sparse = solve_oracle_bruteforce(build_sparse_qp(c.aug, c.cfg, c.x0).as_dense());
    ASSERT_TRUE(cond.converged());
    ASSERT_TRUE(sparse.converged());
    EXPECT_NEAR(cond.z[0], sparse.z[0], 1e-6);
}

TEST(SparseQpProperty, ObjectiveMatchesCondensed)
{
    InstanceGenerator gen(39);
    for (int trial = 0; trial < 30; ++trial) {
        const testkit::MpcInstance inst = gen.instance({});
        const CondensedQp c = build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug);
        const SparseQp s = build_sparse_qp(inst.aug, inst.cfg, inst.x0_aug);
        const Vector u = gen.vector(c.n(), 0.5);
        const double fc = c.mpc_cost(u);
        EXPECT_NEAR(s.mpc_cost(s.rollout(u)), fc, 1e-8 * std::max(1.0, std::abs(fc)));
    }
}

TEST(SparseQpProperty, OptimumReproducesCondensedPrediction)
{
    InstanceGenerator gen(40);
    InstanceShape shape;
    shape.n_x_max = 3;
    shape.horizon_max = 4;
    shape.input_bounds = false;
    shape.output_bounds = false;
    for (int trial = 0; trial < 10; ++trial) {
        const testkit::MpcInstance inst = gen.instance(shape);
        const SparseQp s = build_sparse_qp(inst.aug, inst.cfg, inst.x0_aug);
        const QpSolution sol = solve_oracle_bruteforce(s.as_dense());
        ASSERT_TRUE(sol.converged());

        const std::size_t T = inst.cfg.horizon, nu = s.n_u, ny = s.n_y;
        Vector u(T * nu);
        for (std::size_t t = 0; t < T; ++t) {
            std::copy_n(sol.z.begin() + static_cast<long>(s.u_offset(t)), nu, u.begin() + static_cast<long>(t * nu));
        }
        const Vector predicted = testkit::simulate_outputs(inst.aug, T, inst.x0_aug, u);
        for (std::size_t t = 0; t < T; ++t) {
            const Vector y = s.C * std::span<const double>(sol.z).subspan(s.x_offset(t), s.n_aug());
            for (std::size_t r = 0; r < ny; ++r) {
                EXPECT_NEAR(y[r], predicted[t * ny + r], 1e-8);
            }
        }
    }
}

// extract_first_move

TEST(ExtractFirstMove, ZeroIncrementKeepsInput)
{
    QpSolution sol;
    sol.status = SolveStatus::Converged;
    sol.z = {0.0, 0.0};
    const MpcConfig cfg = MpcConfig::with_dims(1, 1);
    EXPECT_EQ(extract_first_move(sol, cfg, Vector{0.7}), (Vector{0.7}));
}

TEST(ExtractFirstMove, InteriorUpdate)
{
    QpSolution sol;
    sol.status = SolveStatus::Converged;
    sol.z = {0.1};
    MpcConfig cfg = MpcConfig::with_dims(1, 1);
    cfg.u_min = {0.0};
    cfg.u_max = {1.0};
    EXPECT_NEAR(extract_first_move(sol, cfg, Vector{0.5})[0], 0.6, 1e-15);
}

TEST(ExtractFirstMove, UnconvergedSolutionIsRefused)
{
    QpSolution sol;
    sol.status = SolveStatus::Infeasible;
    sol.z = {0.1};
    EXPECT_THROW(extract_first_move(sol, MpcConfig::with_dims(1, 1), Vector{0.5}), SolverError);
}

TEST(ExtractFirstMove, ClipIsNoOpOnConvergedSolution)
{
    InstanceGenerator gen(41);
    for (int trial = 0; trial < 20; ++trial) {
        const testkit::MpcInstance inst = gen.instance({});
        const CondensedQp qp = build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug);
        if (count_inequality_sides(qp.as_dense()) > kOracleMaxConstraints) {
            continue;
        }
        const QpSolution sol = solve_oracle_bruteforce(qp);
        ASSERT_TRUE(sol.converged());
        Vector u_prev(inst.aug.n_u);
        for (std::size_t k = 0; k < inst.aug.n_u; ++k) {
            u_prev[k] = inst.aug.op.u_c[k] + inst.x0_aug[inst.aug.n_x + k];
        }
        const Vector u = extract_first_move(sol, inst.cfg, u_prev);
        for (std::size_t k = 0; k < u.size(); ++k) {
            EXPECT_NEAR(u[k], u_prev[k] + sol.z[k], 1e-12);
        }
    }
}
