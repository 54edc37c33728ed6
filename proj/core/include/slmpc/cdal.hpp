#pragma once

// Coordinate-descent augmented-Lagrangian solver for the sparse MPC QP.
//
// Outer loop: accelerated multiplier updates on the stage dynamics and clamped
// updates on output rows. Inner loop: forward cyclic coordinate descent over
// [U_0, X_1, ..., U_{T-1}, X_T] with per-coordinate clipping to the boxes.
// Only stage-sized matrices are touched; the workspace holds O(T (n_x + n_u))
// vectors and nothing of horizon-squared size.

#include <cstddef>
#include <span>

#include "slmpc/model.hpp"
#include "slmpc/mpc_config.hpp"
#include "slmpc/qp.hpp"

namespace slmpc {

struct CdalOptions {
    // Penalty relative to the equilibrated stage cost scale.
    double rho_initial = 1.0;
    double rho_max_factor = 10.0;  // rho_max = factor * initial rho
    int max_sweeps = 500;
    double sweep_tol = 1e-8;      // on the Jacobi-scaled coordinate change

    bool operator==(const CdalOptions&) const = default;
};

struct CdalWorkspace {
    // Stacked per stage transition: nu[t * n_aug + i].
    Vector nu;
    // Output-row multipliers, T * n_y each, always >= 0.
    Vector lambda_lo, lambda_hi;
    double rho = 0.0;
    Vector z;     // previous iterate, sparse ordering
    Vector diag;  // Jacobi scalars of the AL Hessian, one per coordinate

    // Stage equilibration: penalty weight per dynamics row and per output row.
    Vector row_weight, output_weight;
    double cost_scale = 1.0;

    // Outer residual max(primal, dual) of the last solve, one entry per pass.
    Vector residual_history;

    // Scratch, sized once per problem shape.
    Vector c, y, nu_hat, nu_prev, lo_hat, hi_hat, lo_prev, hi_prev, grad;

    std::size_t horizon = 0, n_aug = 0, n_u = 0, n_y = 0;

    bool initialized() const { return horizon != 0; }
    void reset();
};

QpSolution solve_sparse_cdal(const AugmentedModel& aug, const MpcConfig& cfg,
                             std::span<const double> x0_aug, CdalWorkspace& ws,
                             double tol = 1e-6, int max_outer = 200,
                             const CdalOptions& opts = {});

}  // namespace slmpc
