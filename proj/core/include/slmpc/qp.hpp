#pragma once

#include <cstddef>
#include <string_view>

#include "slmpc/linalg.hpp"

namespace slmpc {

/// Generic dense convex QP
///
///   min  1/2 z'Hz + h'z
///   s.t. A_eq z = b_eq,  g_l <= G z <= g_u,  z_l <= z <= z_u
///
/// Infinite bounds are allowed. `constant` is carried along so objective
/// values can be compared against the originating MPC cost.
struct DenseQp {
    Matrix H;
    Vector h;
    Matrix A_eq;
    Vector b_eq;
    Matrix G;
    Vector g_l, g_u;
    Vector z_l, z_u;
    double constant = 0.0;

    std::size_t n() const { return h.size(); }
    double objective(std::span<const double> z) const;
};

enum class SolveStatus { Converged, MaxIterations, Infeasible };

std::string_view to_string(SolveStatus s);

/// Multiplier convention for the dense solvers: at the solution
///   H z + h - A_eq' y_eq - G' y_general - y_bound = 0,
/// with y >= 0 on an active lower side and y <= 0 on an active upper side.
struct QpSolution {
    Vector z;
    double objective = 0.0;  // excludes the constant term
    SolveStatus status = SolveStatus::MaxIterations;
    int outer_iterations = 0;
    int inner_iterations = 0;
    double solve_time = 0.0;  // seconds
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    Vector y_bound;
    Vector y_general;
    Vector y_eq;

    bool converged() const { return status == SolveStatus::Converged; }
};

/// Infinity norm of the stationarity residual under the convention above.
double kkt_stationarity(const DenseQp& qp, const QpSolution& sol);
/// Largest violation of any equality, general row, or box.
double primal_violation(const DenseQp& qp, std::span<const double> z);

}  // namespace slmpc
