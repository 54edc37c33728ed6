// Solver and QP-construction timings across horizon lengths.

#include <benchmark/benchmark.h>

#include "slmpc/active_set.hpp"
#include "slmpc/cdal.hpp"
#include "slmpc/condensing.hpp"
#include "slmpc/controller.hpp"
#include "slmpc/plants.hpp"
#include "slmpc/sparse_qp.hpp"
#include "support/random_instances.hpp"

using namespace slmpc;

namespace {

// Fixed plant shape, horizon from the benchmark argument. Output bounds are
// loose enough that only some rows bind.
testkit::MpcInstance instance(std::size_t T)
{
    testkit::InstanceGenerator gen(7);
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

void BM_BuildCondensed(benchmark::State& state)
{
    const auto inst = instance(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug));
    }
}

void BM_BuildSparse(benchmark::State& state)
{
    const auto inst = instance(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(build_sparse_qp(inst.aug, inst.cfg, inst.x0_aug));
    }
}

// Cold solves include building the condensed QP, which the sparse solver never does.
void BM_ActiveSetCold(benchmark::State& state)
{
    const auto inst = instance(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        const CondensedQp qp = build_condensed_qp(inst.aug, inst.cfg, inst.x0_aug);
        ActiveSetWorkspace ws;
        benchmark::DoNotOptimize(solve_condensed_activeset(qp, ws));
    }
}

void BM_CdalCold(benchmark::State& state)
{
    const auto inst = instance(static_cast<std::size_t>(state.range(0)));
    int iters = 0;
    for (auto _ : state) {
        CdalWorkspace ws;
        const QpSolution sol = solve_sparse_cdal(inst.aug, inst.cfg, inst.x0_aug, ws, 1e-6, 1000);
        iters = sol.outer_iterations;
    }
    state.counters["outer"] = iters;
}

// Same QP solved repeatedly from the previous solution.
void BM_CdalWarm(benchmark::State& state)
{
    const auto inst = instance(static_cast<std::size_t>(state.range(0)));
    CdalWorkspace ws;
    (void)solve_sparse_cdal(inst.aug, inst.cfg, inst.x0_aug, ws, 1e-6, 1000);
    int iters = 0;
    for (auto _ : state) {
        const QpSolution sol = solve_sparse_cdal(inst.aug, inst.cfg, inst.x0_aug, ws, 1e-6, 1000);
        iters = sol.outer_iterations;
    }
    state.counters["outer"] = iters;
}

// One controller step on the CSTR at its nominal point, model relinearized
// every call as in successive linearization.
void BM_CstrControllerStep(benchmark::State& state)
{
    const PlantEntry cstr = plants::cstr();
    MpcConfig cfg = MpcConfig::with_dims(1, 1, 3e6, 1.0);
    cfg.horizon = static_cast<std::size_t>(state.range(0));
    cfg.u_min = {280.0};
    cfg.u_max = {304.0};
    cfg.r = {0.85};
    ControllerSettings settings;
    settings.solver = state.range(1) == 0 ? SolverKind::ActiveSetCondensed : SolverKind::CdalSparse;
    settings.max_iter = 1000;
    MpcController mpc(cstr.model, cfg, settings);
    for (auto _ : state) {
        mpc.relinearize(cstr.x_nominal, cstr.u_nominal);
        benchmark::DoNotOptimize(mpc.solve(cstr.x_nominal, cstr.u_nominal));
    }
    state.SetLabel(std::string(to_string(settings.solver)));
}

}  // namespace

BENCHMARK(BM_BuildCondensed)->RangeMultiplier(2)->Range(5, 80);
BENCHMARK(BM_BuildSparse)->RangeMultiplier(2)->Range(5, 80);
BENCHMARK(BM_ActiveSetCold)->RangeMultiplier(2)->Range(5, 80);
BENCHMARK(BM_CdalCold)->RangeMultiplier(2)->Range(5, 80);
BENCHMARK(BM_CdalWarm)->RangeMultiplier(2)->Range(5, 80);
BENCHMARK(BM_CstrControllerStep)->ArgsProduct({{10, 40}, {0, 1}});

BENCHMARK_MAIN();
