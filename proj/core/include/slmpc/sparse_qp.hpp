#pragma once

// Sparse MPC-to-QP construction: predicted states stay as decision variables
// and the dynamics become stage equality constraints. The decision vector is
// ordered stage by stage, [U_0, X_1, U_1, X_2, ..., U_{T-1}, X_T].

#include <cstddef>
#include <span>

#include "slmpc/model.hpp"
#include "slmpc/mpc_config.hpp"
#include "slmpc/qp.hpp"

namespace slmpc {

struct SparseQp {
    std::size_t horizon = 0;
    std::size_t n_x = 0;
    std::size_t n_u = 0;
    std::size_t n_y = 0;

    // Stage cost 1/2 X'QX + q'X on every X_{t+1}, 1/2 U'RU on every U_t.
    Matrix Q;
    Vector q;
    Matrix R;
    double constant = 0.0;

    // X_{t+1} = A X_t + B U_t + e with X_0 = x0.
    Matrix A;
    Matrix B;
    Matrix C;
    Vector e;
    Vector x0;

    // Stagewise boxes and output rows (delta coordinates).
    Vector du_lo, du_hi;    // n_u
    Vector x_lo, x_hi;      // n_x + n_u; only the dU block is bounded
    Vector y_lo, y_hi;      // n_y, rows C X_{t+1}

    std::size_t n_aug() const { return n_x + n_u; }
    std::size_t stage_size() const { return n_u + n_aug(); }
    std::size_t n() const { return horizon * stage_size(); }
    std::size_t u_offset(std::size_t t) const { return t * stage_size(); }
    std::size_t x_offset(std::size_t t) const { return t * stage_size() + n_u; }  // X_{t+1}

    double objective(std::span<const double> z) const;
    double mpc_cost(std::span<const double> z) const { return objective(z) + constant; }
    /// B_s z - b_s, stacked per stage.
    Vector equality_residual(std::span<const double> z) const;
    /// Stacks a feasible z by rolling the dynamics forward from x0.
    Vector rollout(std::span<const double> increments) const;
    DenseQp as_dense() const;
};

SparseQp build_sparse_qp(const AugmentedModel& aug, const MpcConfig& cfg,
                         std::span<const double> x0_aug);

}  // namespace slmpc
