#pragma once

// Receding-horizon controller: linearize -> (reduce) -> discretize -> augment,
// then solve the condensed or sparse QP and apply the first move.

#include <optional>
#include <span>
#include <string_view>

#include "slmpc/active_set.hpp"
#include "slmpc/cdal.hpp"
#include "slmpc/model.hpp"
#include "slmpc/mpc_config.hpp"
#include "slmpc/qp.hpp"

namespace slmpc {

enum class SolverKind { CdalSparse, ActiveSetCondensed };

std::string_view to_string(SolverKind s);
std::optional<SolverKind> parse_solver_kind(std::string_view name);

/// u_prev + dU_0 clipped to the absolute input box. Throws SolverError when the
/// solution did not converge.
Vector extract_first_move(const QpSolution& sol, const MpcConfig& cfg,
                          std::span<const double> u_prev);

struct ControllerSettings {
    SolverKind solver = SolverKind::ActiveSetCondensed;
    double cdal_tol = 1e-6;
    double activeset_tol = 1e-9;
    CdalOptions cdal;
    int max_iter = 200;
    double fd_step = kDefaultFdStep;
    bool reduce = true;  // structural minimal-subset reduction
    bool fold_feedthrough = false;
    bool warm_start = true;

    bool operator==(const ControllerSettings&) const = default;
};

class MpcController {
public:
    MpcController(const PlantModel& plant, MpcConfig cfg, ControllerSettings settings = {});

    /// Rebuilds the augmented model around (x, u).
    void relinearize(std::span<const double> x, std::span<const double> u);
    bool has_model() const { return aug_.has_value(); }
    const AugmentedModel& model() const;
    const std::vector<std::size_t>& retained_states() const { return retained_; }

    /// [x - x_c; u_prev - u_c] over the retained states.
    Vector augmented_state(std::span<const double> x, std::span<const double> u_prev) const;

    /// Solves the QP for the current measurement. The solution is returned
    /// whatever its status; the caller decides how to act on failure.
    QpSolution solve(std::span<const double> x, std::span<const double> u_prev);

    const MpcConfig& config() const { return cfg_; }
    void set_reference(std::span<const double> r);
    const ControllerSettings& settings() const { return settings_; }
    void reset_warm_start();

private:
    const PlantModel& plant_;
    MpcConfig cfg_;
    ControllerSettings settings_;
    std::optional<AugmentedModel> aug_;
    std::vector<std::size_t> retained_;
    CdalWorkspace cdal_ws_;
    ActiveSetWorkspace as_ws_;
};

}  // namespace slmpc
