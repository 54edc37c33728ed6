#include "slmpc/controller.hpp"

#include <algorithm>
#include <numeric>

#include "slmpc/condensing.hpp"
#include "slmpc/errors.hpp"

namespace slmpc {

std::string_view to_string(SolverKind s)
{
    return s == SolverKind::CdalSparse ? "cdal-sparse" : "activeset-condensed";
}

std::optional<SolverKind> parse_solver_kind(std::string_view name)
{
    if (name == "cdal-sparse") {
        return SolverKind::CdalSparse;
    }
    if (name == "activeset-condensed") {
        return SolverKind::ActiveSetCondensed;
    }
    return std::nullopt;
}

Vector extract_first_move(const QpSolution& sol, const MpcConfig& cfg,
                          std::span<const double> u_prev)
{
    if (!sol.converged()) {
        throw SolverError("first move requested from a solve with status " +
                          std::string(to_string(sol.status)));
    }
    const std::size_t nu = u_prev.size();
    if (sol.z.size() < nu || cfg.u_min.size() != nu || cfg.u_max.size() != nu) {
        throw AssemblyError("extract_first_move: input dimension mismatch");
    }
    Vector u(nu);
    for (std::size_t k = 0; k < nu; ++k) {
        u[k] = std::clamp(u_prev[k] + sol.z[k], cfg.u_min[k], cfg.u_max[k]);
    }
    return u;
}

MpcController::MpcController(const PlantModel& plant, MpcConfig cfg, ControllerSettings settings)
    : plant_(plant), cfg_(std::move(cfg)), settings_(settings)
{
    cfg_.validate(plant.n_u, plant.n_y);
}

void MpcController::relinearize(std::span<const double> x, std::span<const double> u)
{
    const OperatingPoint op = make_operating_point(plant_, x, u);
    CtLinearModel ct = linearize(plant_, op, settings_.fd_step);
    if (settings_.reduce) {
        ReducedModel red = reduce_minimal_subset(ct);
        ct = std::move(red.model);
        retained_ = std::move(red.retained);
    } else {
        retained_.resize(plant_.n_x);
        std::iota(retained_.begin(), retained_.end(), std::size_t{0});
    }
    aug_ = augment_delta(discretize_euler(ct, cfg_.Ts), settings_.fold_feedthrough);
}

const AugmentedModel& MpcController::model() const
{
    if (!aug_) {
        throw std::logic_error("MpcController: no model yet; call relinearize first");
    }
    return *aug_;
}

Vector MpcController::augmented_state(std::span<const double> x,
                                      std::span<const double> u_prev) const
{
    const AugmentedModel& aug = model();
    Vector x0(aug.n_aug());
    for (std::size_t i = 0; i < retained_.size(); ++i) {
        x0[i] = x[retained_[i]] - aug.op.x_c[i];
    }
    for (std::size_t k = 0; k < aug.n_u; ++k) {
        x0[aug.n_x + k] = u_prev[k] - aug.op.u_c[k];
    }
    return x0;
}

QpSolution MpcController::solve(std::span<const double> x, std::span<const double> u_prev)
{
    const AugmentedModel& aug = model();
    const Vector x0 = augmented_state(x, u_prev);
    if (!settings_.warm_start) {
        reset_warm_start();
    }
    if (settings_.solver == SolverKind::CdalSparse) {
        return solve_sparse_cdal(aug, cfg_, x0, cdal_ws_, settings_.cdal_tol, settings_.max_iter,
                                 settings_.cdal);
    }
    const CondensedQp qp = build_condensed_qp(aug, cfg_, x0);
    return solve_condensed_activeset(qp, as_ws_, settings_.activeset_tol,
                                     settings_.max_iter);
}

void MpcController::set_reference(std::span<const double> r)
{
    if (r.size() != cfg_.r.size()) {
        throw AssemblyError("reference has the wrong length");
    }
    std::copy(r.begin(), r.end(), cfg_.r.begin());
}

void MpcController::reset_warm_start()
{
    cdal_ws_.reset();
    as_ws_.working_set.clear();
    as_ws_.previous_z.clear();
}

}  // namespace slmpc
