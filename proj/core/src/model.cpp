#include "slmpc/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>
#include <stdexcept>

#include "slmpc/errors.hpp"

namespace slmpc {

namespace {

// Number of dt-steps in span, or -1 when span is not an integer multiple of dt.
long steps_in(double span, double dt)
{
    const double q = span / dt;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) {
        return -1;
    }
    return static_cast<long>(r);
}

void check_shape(const Matrix& m, std::size_t r, std::size_t c, const char* name)
{
    if (m.rows() != r || m.cols() != c) {
        std::ostringstream os;
        os << "analytic Jacobian " << name << " has shape " << m.rows() << "x" << m.cols()
           << ", expected " << r << "x" << c;
        throw std::invalid_argument(os.str());
    }
}

void check_finite(const Matrix& m, const char* name)
{
    for (std::size_t c = 0; c < m.cols(); ++c) {
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (!std::isfinite(m(r, c))) {
                std::ostringstream os;
                os << "non-finite entry in " << name << " column " << c;
                throw LinearizationError(name, c, os.str());
            }
        }
    }
}

// Central differences of `map` with respect to the argument selected by
// perturb_x, filling a rows x (len of perturbed argument) matrix.
Matrix central_difference(const PlantModel::VectorMap& map, std::span<const double> x,
                          std::span<const double> u, bool perturb_x, std::size_t rows,
                          double fd_step)
{
    Vector xp(x.begin(), x.end());
    Vector up(u.begin(), u.end());
    Vector& arg = perturb_x ? xp : up;
    Matrix jac(rows, arg.size());
    for (std::size_t j = 0; j < arg.size(); ++j) {
        const double base = arg[j];
        const double h = fd_step * std::max(1.0, std::abs(base));
        arg[j] = base + h;
        const Vector fp = map(xp, up);
        arg[j] = base - h;
        const Vector fm = map(xp, up);
        arg[j] = base;
        if (fp.size() != rows || fm.size() != rows) {
            throw std::invalid_argument("plant map returned a vector of the wrong length");
        }
        for (std::size_t i = 0; i < rows; ++i) {
            jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    return jac;
}

}  // namespace

Vector PlantModel::eval_dynamics(std::span<const double> x, std::span<const double> u) const
{
    Vector v = dynamics(x, u);
    if (v.size() != n_x) {
        throw std::invalid_argument("plant dynamics returned a vector of the wrong length");
    }
    return v;
}

Vector PlantModel::eval_output(std::span<const double> x, std::span<const double> u) const
{
    Vector v = output(x, u);
    if (v.size() != n_y) {
        throw std::invalid_argument("plant output returned a vector of the wrong length");
    }
    return v;
}

OperatingPoint make_operating_point(const PlantModel& model, std::span<const double> x,
                                    std::span<const double> u)
{
    if (x.size() != model.n_x || u.size() != model.n_u) {
        throw std::invalid_argument("operating point dimensions do not match the plant");
    }
    OperatingPoint op;
    op.x_c.assign(x.begin(), x.end());
    op.u_c.assign(u.begin(), u.end());
    op.y_c = model.eval_output(x, u);
    op.xdot_c = model.eval_dynamics(x, u);
    return op;
}

InputSchedule InputSchedule::constant(Vector u)
{
    InputSchedule s;
    s.start.push_back(0.0);
    s.value.push_back(std::move(u));
    return s;
}

const Vector& InputSchedule::at(double t) const
{
    if (value.empty()) {
        throw std::invalid_argument("empty input schedule");
    }
    std::size_t k = 0;
    while (k + 1 < start.size() && start[k + 1] <= t) {
        ++k;
    }
    return value[k];
}

Vector rk4_step(const PlantModel& model, std::span<const double> x, std::span<const double> u,
                double h)
{
    const std::size_t n = x.size();
    const Vector k1 = model.eval_dynamics(x, u);
    Vector tmp(n);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + 0.5 * h * k1[i];
    }
    const Vector k2 = model.eval_dynamics(tmp, u);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + 0.5 * h * k2[i];
    }
    const Vector k3 = model.eval_dynamics(tmp, u);
    for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = x[i] + h * k3[i];
    }
    const Vector k4 = model.eval_dynamics(tmp, u);
    Vector next(n);
    for (std::size_t i = 0; i < n; ++i) {
        next[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return next;
}

Trajectory integrate_plant(const PlantModel& model, std::span<const double> x0,
                           const InputSchedule& u_profile, double t_span, double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("integrate_plant: dt must be positive");
    }
    if (x0.size() != model.n_x || !all_finite(x0)) {
        throw std::invalid_argument("integrate_plant: x0 must be finite with n_x entries");
    }
    if (u_profile.start.size() != u_profile.value.size() || u_profile.start.empty() ||
        u_profile.start.front() != 0.0) {
        throw std::invalid_argument("integrate_plant: input schedule must start at t = 0");
    }
    const long n_steps = steps_in(t_span, dt);
    if (n_steps < 0) {
        throw std::invalid_argument("integrate_plant: dt does not divide t_span");
    }
    // Segment boundaries expressed in whole steps.
    std::vector<long> seg_step;
    for (std::size_t k = 0; k < u_profile.start.size(); ++k) {
        const long s = steps_in(u_profile.start[k], dt);
        if (s < 0 || (k > 0 && s <= seg_step.back())) {
            throw std::invalid_argument("integrate_plant: dt does not divide an input segment");
        }
        if (u_profile.value[k].size() != model.n_u) {
            throw std::invalid_argument("integrate_plant: input segment has wrong length");
        }
        seg_step.push_back(s);
    }

    Trajectory traj;
    traj.time.reserve(static_cast<std::size_t>(n_steps) + 1);
    Vector x(x0.begin(), x0.end());
    std::size_t seg = 0;
    for (long k = 0;; ++k) {
        while (seg + 1 < seg_step.size() && seg_step[seg + 1] <= k) {
            ++seg;
        }
        const Vector& u = u_profile.value[seg];
        traj.time.push_back(static_cast<double>(k) * dt);
        traj.output.push_back(model.eval_output(x, u));
        traj.state.push_back(x);
        if (k == n_steps) {
            break;
        }
        x = rk4_step(model, x, u, dt);
        if (!all_finite(x)) {
            const double t_fail = static_cast<double>(k + 1) * dt;
            std::ostringstream os;
            os << "plant integration diverged at t = " << t_fail;
            throw DivergenceError(t_fail, os.str());
        }
    }
    return traj;
}

CtLinearModel linearize(const PlantModel& model, const OperatingPoint& op, double fd_step)
{
    if (!(fd_step > 0.0)) {
        throw std::invalid_argument("linearize: fd_step must be positive");
    }
    if (op.x_c.size() != model.n_x || op.u_c.size() != model.n_u) {
        throw std::invalid_argument("linearize: operating point dimensions do not match the plant");
    }
    const auto& x = op.x_c;
    const auto& u = op.u_c;
    CtLinearModel ct;
    ct.op = op;
    if (model.dfdx) {
        ct.A = model.dfdx(x, u);
        check_shape(ct.A, model.n_x, model.n_x, "A");
    } else {
        ct.A = central_difference(model.dynamics, x, u, true, model.n_x, fd_step);
    }
    if (model.dfdu) {
        ct.B = model.dfdu(x, u);
        check_shape(ct.B, model.n_x, model.n_u, "B");
    } else {
        ct.B = central_difference(model.dynamics, x, u, false, model.n_x, fd_step);
    }
    if (model.dgdx) {
        ct.C = model.dgdx(x, u);
        check_shape(ct.C, model.n_y, model.n_x, "C");
    } else {
        ct.C = central_difference(model.output, x, u, true, model.n_y, fd_step);
    }
    if (model.dgdu) {
        ct.D = model.dgdu(x, u);
        check_shape(ct.D, model.n_y, model.n_u, "D");
    } else {
        ct.D = central_difference(model.output, x, u, false, model.n_y, fd_step);
    }
    check_finite(ct.A, "A");
    check_finite(ct.B, "B");
    check_finite(ct.C, "C");
    check_finite(ct.D, "D");
    return ct;
}

ReducedModel reduce_minimal_subset(const CtLinearModel& ct, double tol)
{
    if (!(tol >= 0.0)) {
        throw std::invalid_argument("reduce_minimal_subset: tol must be non-negative");
    }
    const std::size_t n = ct.n_x();

    // Forward closure from the states an input touches directly; edge j -> i
    // when x_j enters the derivative of x_i.
    std::vector<char> from_input(n, 0);
    std::deque<std::size_t> queue;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < ct.n_u(); ++k) {
            if (std::abs(ct.B(i, k)) > tol) {
                from_input[i] = 1;
                queue.push_back(i);
                break;
            }
        }
    }
    while (!queue.empty()) {
        const std::size_t j = queue.front();
        queue.pop_front();
        for (std::size_t i = 0; i < n; ++i) {
            if (!from_input[i] && std::abs(ct.A(i, j)) > tol) {
                from_input[i] = 1;
                queue.push_back(i);
            }
        }
    }

    // Backward closure from the states an output reads directly.
    std::vector<char> to_output(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t r = 0; r < ct.n_y(); ++r) {
            if (std::abs(ct.C(r, j)) > tol) {
                to_output[j] = 1;
                queue.push_back(j);
                break;
            }
        }
    }
    while (!queue.empty()) {
        const std::size_t i = queue.front();
        queue.pop_front();
        for (std::size_t j = 0; j < n; ++j) {
            if (!to_output[j] && std::abs(ct.A(i, j)) > tol) {
                to_output[j] = 1;
                queue.push_back(j);
            }
        }
    }

    ReducedModel out;
    for (std::size_t i = 0; i < n; ++i) {
        if (from_input[i] && to_output[i]) {
            out.retained.push_back(i);
        }
    }
    if (out.retained.empty()) {
        throw ReductionError("minimal subset is empty: no input-to-output path through the states");
    }

    const auto& idx = out.retained;
    const std::size_t m = idx.size();
    CtLinearModel& r = out.model;
    r.A = Matrix(m, m);
    r.B = Matrix(m, ct.n_u());
    r.C = Matrix(ct.n_y(), m);
    r.D = ct.D;
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = 0; b < m; ++b) {
            r.A(a, b) = ct.A(idx[a], idx[b]);
        }
        for (std::size_t k = 0; k < ct.n_u(); ++k) {
            r.B(a, k) = ct.B(idx[a], k);
        }
        for (std::size_t row = 0; row < ct.n_y(); ++row) {
            r.C(row, a) = ct.C(row, idx[a]);
        }
    }
    r.op = ct.op;
    r.op.x_c.clear();
    r.op.xdot_c.clear();
    for (std::size_t i : idx) {
        if (i < ct.op.x_c.size()) {
            r.op.x_c.push_back(ct.op.x_c[i]);
        }
        if (i < ct.op.xdot_c.size()) {
            r.op.xdot_c.push_back(ct.op.xdot_c[i]);
        }
    }
    return out;
}

DtLinearModel discretize_euler(const CtLinearModel& ct, double Ts)
{
    if (!(Ts > 0.0)) {
        throw std::invalid_argument("discretize_euler: Ts must be positive");
    }
    DtLinearModel dt;
    dt.A_d = Matrix::identity(ct.n_x()) + Ts * ct.A;
    dt.B_d = Ts * ct.B;
    dt.C_d = ct.C;
    dt.D_d = ct.D;
    if (ct.op.xdot_c.empty()) {
        dt.e.assign(ct.n_x(), 0.0);
    } else {
        if (ct.op.xdot_c.size() != ct.n_x()) {
            throw std::invalid_argument("discretize_euler: xdot_c has the wrong length");
        }
        dt.e = scaled(ct.op.xdot_c, Ts);
    }
    dt.Ts = Ts;
    dt.op = ct.op;
    return dt;
}

AugmentedModel augment_delta(const DtLinearModel& dt, bool fold_feedthrough)
{
    const std::size_t nx = dt.n_x();
    const std::size_t nu = dt.n_u();
    const std::size_t ny = dt.n_y();
    const bool has_feedthrough = !dt.D_d.empty() && max_abs(dt.D_d) > 1e-12;
    if (has_feedthrough && !fold_feedthrough) {
        throw FeedthroughError(
            "augment_delta: plant has direct feedthrough (D_d != 0); enable folding to accept it");
    }

    AugmentedModel aug;
    aug.n_x = nx;
    aug.n_u = nu;
    aug.n_y = ny;
    aug.op = dt.op;

    aug.A_hat = Matrix(nx + nu, nx + nu);
    aug.A_hat.set_block(0, 0, dt.A_d);
    aug.A_hat.set_block(0, nx, dt.B_d);
    aug.A_hat.set_block(nx, nx, Matrix::identity(nu));

    aug.B_hat = Matrix(nx + nu, nu);
    aug.B_hat.set_block(0, 0, dt.B_d);
    aug.B_hat.set_block(nx, 0, Matrix::identity(nu));

    aug.C_hat = Matrix(ny, nx + nu);
    aug.C_hat.set_block(0, 0, dt.C_d);
    if (has_feedthrough) {
        aug.C_hat.set_block(0, nx, dt.D_d);
    }

    aug.e_hat.assign(nx + nu, 0.0);
    std::copy(dt.e.begin(), dt.e.end(), aug.e_hat.begin());
    return aug;
}

}  // namespace slmpc
