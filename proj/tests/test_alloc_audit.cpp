// Allocation audit for the sparse solver. Replaces the global allocation
// functions, so it lives in its own binary.

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <new>

#include "slmpc/cdal.hpp"
#include "slmpc/condensing.hpp"
#include "support/random_instances.hpp"

namespace {

std::atomic<bool> g_tracking{false};
std::atomic<std::size_t> g_largest{0};
std::atomic<std::size_t> g_total{0};
std::atomic<std::size_t> g_count{0};

void* tracked_alloc(std::size_t n)
{
    if (g_tracking.load(std::memory_order_relaxed)) {
        g_count.fetch_add(1, std::memory_order_relaxed);
        g_total.fetch_add(n, std::memory_order_relaxed);
        std::size_t prev = g_largest.load(std::memory_order_relaxed);
        while (n > prev && !g_largest.compare_exchange_weak(prev, n, std::memory_order_relaxed)) {
        }
    }
    if (void* p = std::malloc(n == 0 ? 1 : n)) {
        return p;
    }
    throw std::bad_alloc();
}

struct AllocStats {
    std::size_t largest, total, count;
};

template <class F>
AllocStats audit(F&& body)
{
    g_largest = 0;
    g_total = 0;
    g_count = 0;
    g_tracking = true;
    body();
    g_tracking = false;
    return {g_largest.load(), g_total.load(), g_count.load()};
}

}  // namespace

void* operator new(std::size_t n) { return tracked_alloc(n); }
void* operator new[](std::size_t n) { return tracked_alloc(n); }
void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }

using namespace slmpc;

namespace {

testkit::MpcInstance fixed_shape_instance(std::size_t T)
{
    testkit::InstanceGenerator gen(71);
    testkit::MpcInstance inst;
    inst.aug = gen.augmented(6, 2, 2, 0.1);
    inst.cfg = MpcConfig::with_dims(2, 2, 10.0, 1.0);
    inst.cfg.horizon = T;
    inst.cfg.du_min = {-0.2, -0.2};
    inst.cfg.du_max = {0.2, 0.2};
    inst.cfg.y_min = sub(inst.aug.op.y_c, Vector{1.0, 1.0});
    inst.cfg.y_max = add(inst.aug.op.y_c, Vector{1.0, 1.0});
    inst.cfg.r = add(inst.aug.op.y_c, Vector{0.5, -0.5});
    inst.x0_aug = gen.vector(inst.aug.n_aug(), 0.1);
    return inst;
}

// Bytes of the smallest horizon-squared dense object the solver could build.
std::size_t horizon_squared_bytes(const testkit::MpcInstance& inst)
{
    const std::size_t n = inst.cfg.horizon * inst.aug.n_u;
    return n * n * sizeof(double);
}

}  // namespace

TEST(AllocationAudit, HookSeesCondensedHessian)
{
    const testkit::MpcInstance inst = fixed_shape_instance(40);
    const AllocStats s = audit([&] { (void)build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug); });
    EXPECT_GE(s.largest, horizon_squared_bytes(inst));
}

TEST(AllocationAudit, CdalNeverAllocatesHorizonSquaredObjects)
{
    for (std::size_t T : {10u, 20u, 40u}) {
        const testkit::MpcInstance inst = fixed_shape_instance(T);
        CdalWorkspace ws;
        QpSolution sol;
        const AllocStats s = audit([&] { sol = solve_sparse_cdal(inst.aug, inst.cfg, inst.x0_aug, ws); });
        ASSERT_TRUE(sol.converged()) << "T = " << T;
        EXPECT_LT(s.largest, horizon_squared_bytes(inst)) << "T = " << T;
        // Largest block allowed: a horizon-long vector, a stage-sized matrix,
        // or the per-pass residual history (max_outer entries).
        const std::size_t stage = inst.aug.n_u + inst.aug.n_aug();
        const std::size_t budget = std::max({T * stage, stage * stage, std::size_t{200}});
        EXPECT_LE(s.largest, budget * sizeof(double)) << "T = " << T;
    }
}

TEST(AllocationAudit, CdalMemoryGrowsLinearlyWithHorizon)
{
    std::size_t total_small = 0, total_large = 0;
    for (std::size_t T : {10u, 40u}) {
        const testkit::MpcInstance inst = fixed_shape_instance(T);
        CdalWorkspace ws;
        (void)solve_sparse_cdal(inst.aug, inst.cfg, inst.x0_aug, ws);
        // Warm solve: workspace already sized for this shape.
        const AllocStats s = audit([&] { (void)solve_sparse_cdal(inst.aug, inst.cfg, inst.x0_aug, ws); });
        (T == 10 ? total_small : total_large) = s.total;
    }
    ASSERT_GT(total_small, 0u);
    // Four times the horizon: linear growth gives ~4x, quadratic would give ~16x.
    EXPECT_LE(static_cast<double>(total_large) / static_cast<double>(total_small), 6.0);
}
