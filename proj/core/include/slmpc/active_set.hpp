#pragma once

// Warm-started primal active-set method for the condensed QP.
//
// Each iteration solves the equality-constrained subproblem on the working set
// (range-space: Cholesky of H, then the Schur complement of the working rows),
// then either steps to the nearest blocking constraint or drops the most
// negative multiplier. A start point that violates general rows is handled by
// an elastic phase: a single slack s >= 0 relaxes every general row and is
// penalised by mu*s + eps/2*s^2. Once s reaches zero the slack is removed and
// the iteration continues on the original problem.

#include <cstddef>
#include <optional>
#include <vector>

#include "slmpc/condensing.hpp"
#include "slmpc/qp.hpp"

namespace slmpc {

enum class ConstraintKind : unsigned char { Bound, General };

struct WorkingConstraint {
    ConstraintKind kind;
    std::size_t index;
    bool upper;

    bool operator==(const WorkingConstraint&) const = default;
};

struct ActiveSetWorkspace {
    std::vector<WorkingConstraint> working_set;  // at the last solution
    Vector previous_z;

    // Cholesky of the last Hessian, reused while H is unchanged (fixed-model MPC).
    Matrix cached_hessian;
    std::optional<Cholesky> hessian_factor;
    int factorizations = 0;

    void reset();
};

/// Pivots that push the working-set Schur complement past this condition
/// estimate are rejected.
inline constexpr double kMaxWorkingSetCondition = 1e12;

QpSolution solve_condensed_activeset(const CondensedQp& qp, ActiveSetWorkspace& ws,
                                     double tol = 1e-9, int max_iter = 200);

}  // namespace slmpc
