#pragma once

// Plant models and the chain of linear models derived from them:
//
//   PlantModel --linearize--> CtLinearModel --discretize_euler--> DtLinearModel
//              --augment_delta--> AugmentedModel
//
// All delta quantities are offsets from the OperatingPoint carried by each
// model.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "slmpc/linalg.hpp"

namespace slmpc {

/// Nonlinear continuous-time plant  xdot = f(x, u),  y = g(x, u).
struct PlantModel {
    using VectorMap = std::function<Vector(std::span<const double> x, std::span<const double> u)>;
    using JacobianMap = std::function<Matrix(std::span<const double> x, std::span<const double> u)>;

    std::size_t n_x = 0;
    std::size_t n_u = 0;
    std::size_t n_y = 0;
    VectorMap dynamics;
    VectorMap output;

    // Optional analytic Jacobians; an empty function means "use finite differences".
    JacobianMap dfdx;
    JacobianMap dfdu;
    JacobianMap dgdx;
    JacobianMap dgdu;

    /// Evaluates and checks the returned length against n_x.
    Vector eval_dynamics(std::span<const double> x, std::span<const double> u) const;
    /// Evaluates and checks the returned length against n_y.
    Vector eval_output(std::span<const double> x, std::span<const double> u) const;
};

struct OperatingPoint {
    Vector x_c;
    Vector u_c;
    Vector y_c;
    Vector xdot_c;
};

/// Evaluates the plant at (x, u) to fill a consistent operating point.
OperatingPoint make_operating_point(const PlantModel& model, std::span<const double> x,
                                    std::span<const double> u);

struct CtLinearModel {
    Matrix A;
    Matrix B;
    Matrix C;
    Matrix D;
    OperatingPoint op;

    std::size_t n_x() const { return A.rows(); }
    std::size_t n_u() const { return B.cols(); }
    std::size_t n_y() const { return C.rows(); }
};

struct DtLinearModel {
    Matrix A_d;
    Matrix B_d;
    Matrix C_d;
    Matrix D_d;
    Vector e;
    double Ts = 0.0;
    OperatingPoint op;

    std::size_t n_x() const { return A_d.rows(); }
    std::size_t n_u() const { return B_d.cols(); }
    std::size_t n_y() const { return C_d.rows(); }
};

/// Delta-formulation model. The state stacks [dX_t; dU_{t-1}], the input is the
/// increment dU_t - dU_{t-1}.
struct AugmentedModel {
    Matrix A_hat;
    Matrix B_hat;
    Matrix C_hat;
    Vector e_hat;
    std::size_t n_x = 0;
    std::size_t n_u = 0;
    std::size_t n_y = 0;
    OperatingPoint op;

    std::size_t n_aug() const { return n_x + n_u; }
};

/// Piecewise-constant input schedule; segment k holds value[k] from start[k]
/// until start[k+1] (or forever for the last one). start[0] must be 0.
struct InputSchedule {
    std::vector<double> start;
    std::vector<Vector> value;

    static InputSchedule constant(Vector u);
    const Vector& at(double t) const;
};

struct Trajectory {
    std::vector<double> time;
    std::vector<Vector> state;
    std::vector<Vector> output;
};

/// One classic fourth-order Runge-Kutta step with the input held.
Vector rk4_step(const PlantModel& model, std::span<const double> x, std::span<const double> u,
                double h);

/// Fixed-step RK4 simulation sampled every dt. Throws DivergenceError on a
/// non-finite state and std::invalid_argument when dt does not divide t_span or
/// a schedule segment.
Trajectory integrate_plant(const PlantModel& model, std::span<const double> x0,
                           const InputSchedule& u_profile, double t_span, double dt);

constexpr double kDefaultFdStep = 1e-6;

/// Jacobians at op: analytic where the plant supplies them, central finite
/// differences otherwise (step fd_step * max(1, |component|)).
CtLinearModel linearize(const PlantModel& model, const OperatingPoint& op,
                        double fd_step = kDefaultFdStep);

struct ReducedModel {
    CtLinearModel model;
    std::vector<std::size_t> retained;  // ascending indices into the original state
};

/// Structural reduction to the states reachable from an input and observable
/// at an output, judged by entries with magnitude above tol.
ReducedModel reduce_minimal_subset(const CtLinearModel& ct, double tol = 0.0);

DtLinearModel discretize_euler(const CtLinearModel& ct, double Ts);

/// When fold_feedthrough is set a nonzero D_d is placed in the dU_{t-1} block of
/// C_hat, which delays feedthrough by one sample.
AugmentedModel augment_delta(const DtLinearModel& dt, bool fold_feedthrough = false);

}  // namespace slmpc
