#include "slmpc/cdal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "slmpc/sparse_qp.hpp"

namespace slmpc {

void CdalWorkspace::reset() { *this = CdalWorkspace(); }

namespace {

void resize_for(CdalWorkspace& ws, const SparseQp& qp)
{
    const std::size_t T = qp.horizon;
    const std::size_t n = qp.n_aug();
    ws.horizon = T;
    ws.n_aug = n;
    ws.n_u = qp.n_u;
    ws.n_y = qp.n_y;
    ws.nu.assign(T * n, 0.0);
    ws.lambda_lo.assign(T * qp.n_y, 0.0);
    ws.lambda_hi.assign(T * qp.n_y, 0.0);
    ws.rho = 0.0;
    ws.z.clear();
    ws.diag.assign(qp.n(), 0.0);
    for (Vector* v : {&ws.c, &ws.nu_hat, &ws.nu_prev}) {
        v->assign(T * n, 0.0);
    }
    for (Vector* v : {&ws.y, &ws.lo_hat, &ws.hi_hat, &ws.lo_prev, &ws.hi_prev}) {
        v->assign(T * qp.n_y, 0.0);
    }
    ws.grad.assign(qp.n(), 0.0);
}

// Number of finite sides on output row r.
int finite_sides(const SparseQp& qp, std::size_t r)
{
    return static_cast<int>(is_bounded(qp.y_lo[r])) + static_cast<int>(is_bounded(qp.y_hi[r]));
}

// Stage-template equilibration. Ruiz scaling of the KKT matrix of one stage
// (variables [U; X], dynamics rows, output rows) gives per-row penalty weights
// w = E^2 and v = F^2, and a cost scale that sets the base penalty. Everything
// here is stage-sized.
void equilibrate(const SparseQp& qp, CdalWorkspace& ws)
{
    const std::size_t n = qp.n_aug();
    const std::size_t nu = qp.n_u;
    const std::size_t ny = qp.n_y;
    Vector du(nu, 1.0), dx(n, 1.0), e(n, 1.0), f(ny, 1.0);
    Vector cu(nu), cx(n), re(n), rf(ny);
    auto inv_sqrt = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
    for (int pass = 0; pass < 25; ++pass) {
        for (std::size_t k = 0; k < nu; ++k) {
            double m = 0.0;
            for (std::size_t j = 0; j < nu; ++j) {
                m = std::max(m, std::abs(du[k] * qp.R(k, j) * du[j]));
            }
            for (std::size_t i = 0; i < n; ++i) {
                m = std::max(m, std::abs(e[i] * qp.B(i, k) * du[k]));
            }
            cu[k] = m;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double m = e[i] * dx[i];
            for (std::size_t j = 0; j < n; ++j) {
                m = std::max(m, std::abs(dx[i] * qp.Q(i, j) * dx[j]));
                m = std::max(m, std::abs(e[j] * qp.A(j, i) * dx[i]));
            }
            for (std::size_t r = 0; r < ny; ++r) {
                m = std::max(m, std::abs(f[r] * qp.C(r, i) * dx[i]));
            }
            cx[i] = m;
        }
        for (std::size_t i = 0; i < n; ++i) {
            double m = e[i] * dx[i];
            for (std::size_t j = 0; j < n; ++j) {
                m = std::max(m, std::abs(e[i] * qp.A(i, j) * dx[j]));
            }
            for (std::size_t k = 0; k < nu; ++k) {
                m = std::max(m, std::abs(e[i] * qp.B(i, k) * du[k]));
            }
            re[i] = m;
        }
        for (std::size_t r = 0; r < ny; ++r) {
            double m = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                m = std::max(m, std::abs(f[r] * qp.C(r, i) * dx[i]));
            }
            rf[r] = m;
        }
        for (std::size_t k = 0; k < nu; ++k) {
            du[k] *= inv_sqrt(cu[k]);
        }
        for (std::size_t i = 0; i < n; ++i) {
            dx[i] *= inv_sqrt(cx[i]);
            e[i] *= inv_sqrt(re[i]);
        }
        for (std::size_t r = 0; r < ny; ++r) {
            f[r] *= inv_sqrt(rf[r]);
        }
    }
    // Mean column norm of the scaled cost block.
    double cost = 0.0;
    for (std::size_t k = 0; k < nu; ++k) {
        double m = 0.0;
        for (std::size_t j = 0; j < nu; ++j) {
            m = std::max(m, std::abs(du[k] * qp.R(k, j) * du[j]));
        }
        cost += m;
    }
    for (std::size_t i = 0; i < n; ++i) {
        double m = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            m = std::max(m, std::abs(dx[i] * qp.Q(i, j) * dx[j]));
        }
        cost += m;
    }
    cost /= static_cast<double>(n + nu);
    ws.cost_scale = cost > 0.0 ? cost : 1.0;
    ws.row_weight.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        ws.row_weight[i] = e[i] * e[i];
    }
    ws.output_weight.resize(ny);
    for (std::size_t r = 0; r < ny; ++r) {
        ws.output_weight[r] = f[r] * f[r];
    }
}

void compute_diag(const SparseQp& qp, double rho, CdalWorkspace& ws)
{
    const std::size_t n = qp.n_aug();
    const Vector& w = ws.row_weight;
    const Vector& v = ws.output_weight;
    for (std::size_t t = 0; t < qp.horizon; ++t) {
        const std::size_t uo = qp.u_offset(t);
        for (std::size_t k = 0; k < qp.n_u; ++k) {
            double b2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                b2 += w[i] * qp.B(i, k) * qp.B(i, k);
            }
            ws.diag[uo + k] = qp.R(k, k) + rho * b2;
        }
        const std::size_t xo = qp.x_offset(t);
        const bool has_next = t + 1 < qp.horizon;
        for (std::size_t i = 0; i < n; ++i) {
            double s = w[i];
            if (has_next) {
                for (std::size_t j = 0; j < n; ++j) {
                    s += w[j] * qp.A(j, i) * qp.A(j, i);
                }
            }
            for (std::size_t r = 0; r < qp.n_y; ++r) {
                s += finite_sides(qp, r) * v[r] * qp.C(r, i) * qp.C(r, i);
            }
            ws.diag[xo + i] = qp.Q(i, i) + rho * s;
        }
    }
}

// c_t = X_{t+1} - A X_t - B U_t - e and y_t = C X_{t+1}, from scratch.
void refresh_residuals(const SparseQp& qp, std::span<const double> z, Vector& c, Vector& y)
{
    const std::size_t n = qp.n_aug();
    for (std::size_t t = 0; t < qp.horizon; ++t) {
        std::span<const double> prev =
            t == 0 ? std::span<const double>(qp.x0) : z.subspan(qp.x_offset(t - 1), n);
        std::span<const double> u = z.subspan(qp.u_offset(t), qp.n_u);
        std::span<const double> x = z.subspan(qp.x_offset(t), n);
        std::span<double> ct(c.data() + t * n, n);
        for (std::size_t i = 0; i < n; ++i) {
            ct[i] = x[i] - qp.e[i];
        }
        gemv_acc(qp.A, prev, -1.0, ct);
        gemv_acc(qp.B, u, -1.0, ct);
        std::span<double> yt(y.data() + t * qp.n_y, qp.n_y);
        std::fill(yt.begin(), yt.end(), 0.0);
        gemv_acc(qp.C, x, 1.0, yt);
    }
}

// d/dy of the clamped output-row penalty: the effective multiplier on C x.
double hinge(const SparseQp& qp, std::size_t r, double y, double lo_mult, double hi_mult,
             double rho)
{
    double g = 0.0;
    if (is_bounded(qp.y_hi[r])) {
        g += std::max(0.0, hi_mult + rho * (y - qp.y_hi[r]));
    }
    if (is_bounded(qp.y_lo[r])) {
        g -= std::max(0.0, lo_mult + rho * (qp.y_lo[r] - y));
    }
    return g;
}

// One forward cyclic sweep; returns the largest Jacobi-scaled step.
double sweep(const SparseQp& qp, CdalWorkspace& ws, double rho)
{
    const std::size_t T = qp.horizon;
    const std::size_t n = qp.n_aug();
    const std::size_t ny = qp.n_y;
    Vector& z = ws.z;
    const Vector& w = ws.row_weight;
    const Vector& v = ws.output_weight;
    double largest = 0.0;

    for (std::size_t t = 0; t < T; ++t) {
        double* ct = ws.c.data() + t * n;
        const double* nt = ws.nu_hat.data() + t * n;

        const std::size_t uo = qp.u_offset(t);
        for (std::size_t k = 0; k < qp.n_u; ++k) {
            double g = 0.0;
            for (std::size_t j = 0; j < qp.n_u; ++j) {
                g += qp.R(k, j) * z[uo + j];
            }
            for (std::size_t i = 0; i < n; ++i) {
                g -= qp.B(i, k) * (nt[i] + rho * w[i] * ct[i]);
            }
            const double d = ws.diag[uo + k];
            const double next = std::clamp(z[uo + k] - g / d, qp.du_lo[k], qp.du_hi[k]);
            const double delta = next - z[uo + k];
            if (delta != 0.0) {
                z[uo + k] = next;
                for (std::size_t i = 0; i < n; ++i) {
                    ct[i] -= qp.B(i, k) * delta;
                }
                largest = std::max(largest, d * std::abs(delta));
            }
        }

        const std::size_t xo = qp.x_offset(t);
        const bool has_next = t + 1 < T;
        double* cn = has_next ? ws.c.data() + (t + 1) * n : nullptr;
        const double* nn = has_next ? ws.nu_hat.data() + (t + 1) * n : nullptr;
        double* yt = ws.y.data() + t * ny;
        const double* lo = ws.lo_hat.data() + t * ny;
        const double* hi = ws.hi_hat.data() + t * ny;
        for (std::size_t i = 0; i < n; ++i) {
            double g = qp.q[i] + nt[i] + rho * w[i] * ct[i];
            for (std::size_t j = 0; j < n; ++j) {
                g += qp.Q(i, j) * z[xo + j];
            }
            if (has_next) {
                for (std::size_t j = 0; j < n; ++j) {
                    g -= qp.A(j, i) * (nn[j] + rho * w[j] * cn[j]);
                }
            }
            for (std::size_t r = 0; r < ny; ++r) {
                if (qp.C(r, i) != 0.0) {
                    g += qp.C(r, i) * hinge(qp, r, yt[r], lo[r], hi[r], rho * v[r]);
                }
            }
            const double d = ws.diag[xo + i];
            const double next = std::clamp(z[xo + i] - g / d, qp.x_lo[i], qp.x_hi[i]);
            const double delta = next - z[xo + i];
            if (delta != 0.0) {
                z[xo + i] = next;
                ct[i] += delta;
                if (has_next) {
                    for (std::size_t j = 0; j < n; ++j) {
                        cn[j] -= qp.A(j, i) * delta;
                    }
                }
                for (std::size_t r = 0; r < ny; ++r) {
                    yt[r] += qp.C(r, i) * delta;
                }
                largest = std::max(largest, d * std::abs(delta));
            }
        }
    }
    return largest;
}

// Gradient of the ordinary Lagrangian at z with multipliers (nu, lo, hi) into
// ws.grad; returns the infinity norm of its box projection.
double lagrangian_gradient(const SparseQp& qp, CdalWorkspace& ws)
{
    const std::size_t T = qp.horizon;
    const std::size_t n = qp.n_aug();
    const std::size_t ny = qp.n_y;
    const Vector& z = ws.z;
    double res = 0.0;
    auto project = [&](std::size_t idx, double lo, double hi) {
        const double v = z[idx];
        res = std::max(res, std::abs(v - std::clamp(v - ws.grad[idx], lo, hi)));
    };
    for (std::size_t t = 0; t < T; ++t) {
        const double* nt = ws.nu.data() + t * n;
        const std::size_t uo = qp.u_offset(t);
        for (std::size_t k = 0; k < qp.n_u; ++k) {
            double g = 0.0;
            for (std::size_t j = 0; j < qp.n_u; ++j) {
                g += qp.R(k, j) * z[uo + j];
            }
            for (std::size_t i = 0; i < n; ++i) {
                g -= qp.B(i, k) * nt[i];
            }
            ws.grad[uo + k] = g;
            project(uo + k, qp.du_lo[k], qp.du_hi[k]);
        }
        const std::size_t xo = qp.x_offset(t);
        for (std::size_t i = 0; i < n; ++i) {
            double g = qp.q[i] + nt[i];
            for (std::size_t j = 0; j < n; ++j) {
                g += qp.Q(i, j) * z[xo + j];
            }
            if (t + 1 < T) {
                const double* nn = ws.nu.data() + (t + 1) * n;
                for (std::size_t j = 0; j < n; ++j) {
                    g -= qp.A(j, i) * nn[j];
                }
            }
            for (std::size_t r = 0; r < ny; ++r) {
                g += qp.C(r, i) * (ws.lambda_hi[t * ny + r] - ws.lambda_lo[t * ny + r]);
            }
            ws.grad[xo + i] = g;
            project(xo + i, qp.x_lo[i], qp.x_hi[i]);
        }
    }
    return res;
}

void cold_start(const SparseQp& qp, CdalWorkspace& ws)
{
    ws.z = qp.rollout(Vector(qp.horizon * qp.n_u, 0.0));
    for (std::size_t t = 0; t < qp.horizon; ++t) {
        const std::size_t xo = qp.x_offset(t);
        for (std::size_t i = 0; i < qp.n_aug(); ++i) {
            ws.z[xo + i] = std::clamp(ws.z[xo + i], qp.x_lo[i], qp.x_hi[i]);
        }
    }
}

}  // namespace

QpSolution solve_sparse_cdal(const AugmentedModel& aug, const MpcConfig& cfg,
                             std::span<const double> x0_aug, CdalWorkspace& ws, double tol,
                             int max_outer, const CdalOptions& opts)
{
    if (!(tol > 0.0)) {
        throw std::invalid_argument("cdal: tol must be positive");
    }
    if (max_outer < 1) {
        throw std::invalid_argument("cdal: max_outer must be at least 1");
    }
    if (!(opts.rho_initial > 0.0) || !(opts.rho_max_factor >= 1.0) || opts.max_sweeps < 1) {
        throw std::invalid_argument("cdal: invalid options");
    }
    const auto start = std::chrono::steady_clock::now();
    const SparseQp qp = build_sparse_qp(aug, cfg, x0_aug);
    const std::size_t n = qp.n_aug();
    const std::size_t ny = qp.n_y;

    if (ws.horizon != qp.horizon || ws.n_aug != n || ws.n_u != qp.n_u || ws.n_y != ny) {
        resize_for(ws, qp);
    }
    if (ws.z.size() != qp.n()) {
        cold_start(qp, ws);
    }
    equilibrate(qp, ws);
    const double rho0 = opts.rho_initial * ws.cost_scale;
    const double rho_max = rho0 * opts.rho_max_factor;
    double rho = ws.rho > 0.0 ? std::clamp(ws.rho, rho0, rho_max) : rho0;
    compute_diag(qp, rho, ws);
    refresh_residuals(qp, ws.z, ws.c, ws.y);

    ws.nu_hat = ws.nu;
    ws.lo_hat = ws.lambda_lo;
    ws.hi_hat = ws.lambda_hi;
    ws.residual_history.clear();
    ws.residual_history.reserve(static_cast<std::size_t>(max_outer));

    QpSolution sol;
    sol.status = SolveStatus::MaxIterations;
    double theta = 1.0;
    double prev_res = kUnbounded;
    double prev_eq = kUnbounded;
    // The sweep exit is tightened below the requested tolerance so that the
    // inner solves never become the accuracy bottleneck.
    const double sweep_tol = std::min(opts.sweep_tol, 0.1 * tol);
    int outer = 0;
    int sweeps = 0;
    double r_p = 0.0;
    double r_d = 0.0;

    while (outer < max_outer) {
        ++outer;
        for (int s = 0; s < opts.max_sweeps; ++s) {
            ++sweeps;
            if (sweep(qp, ws, rho) <= sweep_tol) {
                break;
            }
        }
        refresh_residuals(qp, ws.z, ws.c, ws.y);

        // Multiplier step from the extrapolated point.
        ws.nu_prev = ws.nu;
        ws.lo_prev = ws.lambda_lo;
        ws.hi_prev = ws.lambda_hi;
        double eq = 0.0;
        for (std::size_t k = 0; k < ws.nu.size(); ++k) {
            ws.nu[k] = ws.nu_hat[k] + rho * ws.row_weight[k % n] * ws.c[k];
            eq = std::max(eq, std::abs(ws.c[k]));
        }
        double ineq = 0.0;
        for (std::size_t t = 0; t < qp.horizon; ++t) {
            for (std::size_t r = 0; r < ny; ++r) {
                const std::size_t k = t * ny + r;
                const double y = ws.y[k];
                const double rr = rho * ws.output_weight[r];
                if (is_bounded(qp.y_lo[r])) {
                    ws.lambda_lo[k] = std::max(0.0, ws.lo_hat[k] + rr * (qp.y_lo[r] - y));
                    ineq = std::max(ineq, std::abs(ws.lambda_lo[k] - ws.lo_hat[k]) / rr);
                }
                if (is_bounded(qp.y_hi[r])) {
                    ws.lambda_hi[k] = std::max(0.0, ws.hi_hat[k] + rr * (y - qp.y_hi[r]));
                    ineq = std::max(ineq, std::abs(ws.lambda_hi[k] - ws.hi_hat[k]) / rr);
                }
            }
        }
        r_p = std::max(eq, ineq);
        r_d = lagrangian_gradient(qp, ws);
        const double res = std::max(r_p, r_d);
        ws.residual_history.push_back(res);
        if (r_p <= tol && r_d <= tol) {
            sol.status = SolveStatus::Converged;
            break;
        }

        bool restart = res > prev_res;
        if (eq > tol && eq > 0.1 * prev_eq && rho < rho_max) {
            rho = std::min(10.0 * rho, rho_max);
            compute_diag(qp, rho, ws);
            restart = true;
        }
        prev_res = res;
        prev_eq = eq;

        if (restart) {
            theta = 1.0;
            ws.nu_hat = ws.nu;
            ws.lo_hat = ws.lambda_lo;
            ws.hi_hat = ws.lambda_hi;
            continue;
        }
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        const double beta = (theta - 1.0) / theta_next;
        theta = theta_next;
        for (std::size_t k = 0; k < ws.nu.size(); ++k) {
            ws.nu_hat[k] = ws.nu[k] + beta * (ws.nu[k] - ws.nu_prev[k]);
        }
        for (std::size_t k = 0; k < ws.lambda_lo.size(); ++k) {
            ws.lo_hat[k] = std::max(0.0, ws.lambda_lo[k] + beta * (ws.lambda_lo[k] - ws.lo_prev[k]));
            ws.hi_hat[k] = std::max(0.0, ws.lambda_hi[k] + beta * (ws.lambda_hi[k] - ws.hi_prev[k]));
        }
    }
    ws.rho = rho;

    sol.z = ws.z;
    sol.objective = qp.objective(sol.z);
    sol.outer_iterations = outer;
    sol.inner_iterations = sweeps;
    sol.primal_residual = r_p;
    sol.dual_residual = r_d;

    // Multipliers in the dense convention of the sparse QP's as_dense().
    sol.y_eq = scaled(ws.nu, -1.0);
    sol.y_bound.assign(qp.n(), 0.0);
    for (std::size_t t = 0; t < qp.horizon; ++t) {
        const std::size_t uo = qp.u_offset(t);
        for (std::size_t k = 0; k < qp.n_u; ++k) {
            const double v = sol.z[uo + k];
            if (v <= qp.du_lo[k] || v >= qp.du_hi[k]) {
                sol.y_bound[uo + k] = ws.grad[uo + k];
            }
        }
        const std::size_t xo = qp.x_offset(t);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = sol.z[xo + i];
            if (v <= qp.x_lo[i] || v >= qp.x_hi[i]) {
                sol.y_bound[xo + i] = ws.grad[xo + i];
            }
        }
        for (std::size_t r = 0; r < ny; ++r) {
            if (is_bounded(qp.y_lo[r]) || is_bounded(qp.y_hi[r])) {
                sol.y_general.push_back(ws.lambda_lo[t * ny + r] - ws.lambda_hi[t * ny + r]);
            }
        }
    }
    sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

}  // namespace slmpc
