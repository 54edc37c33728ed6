#pragma once

// Condensed MPC-to-QP construction. Predicted outputs over the horizon are an
// affine map of the stacked input increments,
//
//   [dY_1; ...; dY_T] = G M [U_0; ...; U_{T-1}] + G m,
//
// with M block lower-triangular Toeplitz (blocks A^k B), m the accumulated
// drift and G = blockdiag(C).

#include <cstddef>
#include <span>

#include "slmpc/model.hpp"
#include "slmpc/mpc_config.hpp"
#include "slmpc/qp.hpp"

namespace slmpc {

struct PredictionMatrices {
    Matrix M;  // (T n_aug) x (T n_u)
    Vector m;  // T n_aug
    Matrix G;  // (T n_y) x (T n_aug)
};

PredictionMatrices build_prediction_matrices(const AugmentedModel& aug, std::size_t horizon);

/// Condensed QP over z = [U_0; ...; U_{T-1}]. General rows come in two groups:
/// `input_rows` cumulative-sum rows bounding dU_t, then output rows bounding dY_t.
struct CondensedQp {
    Matrix H;
    Vector h;
    Matrix G;
    Vector g_l, g_u;
    Vector z_l, z_u;
    double constant = 0.0;
    std::size_t input_rows = 0;

    std::size_t n() const { return h.size(); }
    double objective(std::span<const double> z) const;
    /// Objective plus constant, i.e. the MPC tracking cost.
    double mpc_cost(std::span<const double> z) const { return objective(z) + constant; }
    DenseQp as_dense() const;
};

/// x0_aug = [x - x_c; u_prev - u_c]; zero when the model was linearized at the
/// current point.
CondensedQp build_condensed_qp(const AugmentedModel& aug, const MpcConfig& cfg,
                               std::span<const double> x0_aug);

}  // namespace slmpc
