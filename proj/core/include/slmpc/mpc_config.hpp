#pragma once

#include <cstddef>
#include <limits>

#include "slmpc/linalg.hpp"

namespace slmpc {

/// Sentinel for a missing bound. Rows whose bounds are both unbounded are
/// skipped during constraint assembly.
inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();

inline bool is_bounded(double b) { return b > -kUnbounded && b < kUnbounded; }

/// Tracking MPC settings in absolute plant units.
struct MpcConfig {
    std::size_t horizon = 10;
    double Ts = 0.02;
    Matrix W_y;   // n_y x n_y, symmetric PSD
    Matrix W_du;  // n_u x n_u, symmetric PD
    Vector du_min, du_max;
    Vector u_min, u_max;
    Vector y_min, y_max;
    Vector r;

    /// Unbounded config with the given weights on the diagonal.
    static MpcConfig with_dims(std::size_t n_u, std::size_t n_y, double w_y = 100.0,
                               double w_du = 1.0);

    std::size_t n_u() const { return W_du.rows(); }
    std::size_t n_y() const { return W_y.rows(); }

    /// Throws AssemblyError naming the first violated invariant.
    void validate(std::size_t n_u, std::size_t n_y) const;

    bool operator==(const MpcConfig&) const = default;
};

}  // namespace slmpc
