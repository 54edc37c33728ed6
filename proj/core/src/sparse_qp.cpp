#include "slmpc/sparse_qp.hpp"

#include <string>

#include "slmpc/errors.hpp"

namespace slmpc {

SparseQp build_sparse_qp(const AugmentedModel& aug, const MpcConfig& cfg,
                         std::span<const double> x0_aug)
{
    const std::size_t n = aug.n_aug();
    if (x0_aug.size() != n) {
        throw AssemblyError("x0_aug has length " + std::to_string(x0_aug.size()) + ", expected " +
                            std::to_string(n));
    }
    if (aug.A_hat.rows() != n || aug.B_hat.cols() != aug.n_u || aug.C_hat.cols() != n ||
        aug.op.u_c.size() != aug.n_u || aug.op.y_c.size() != aug.n_y) {
        throw AssemblyError("augmented model blocks are inconsistent with its dimensions");
    }
    cfg.validate(aug.n_u, aug.n_y);

    SparseQp qp;
    qp.horizon = cfg.horizon;
    qp.n_x = aug.n_x;
    qp.n_u = aug.n_u;
    qp.n_y = aug.n_y;
    qp.A = aug.A_hat;
    qp.B = aug.B_hat;
    qp.C = aug.C_hat;
    qp.e = aug.e_hat;
    qp.x0.assign(x0_aug.begin(), x0_aug.end());

    const Vector dr = sub(cfg.r, aug.op.y_c);
    const Matrix wc = cfg.W_y * aug.C_hat;
    qp.Q = aug.C_hat.transpose() * wc;
    qp.q.assign(n, 0.0);
    gemv_t_acc(wc, dr, -1.0, qp.q);
    qp.R = cfg.W_du;
    qp.constant = 0.5 * static_cast<double>(cfg.horizon) * dot(dr, cfg.W_y * dr);

    qp.du_lo = cfg.du_min;
    qp.du_hi = cfg.du_max;
    qp.x_lo.assign(n, -kUnbounded);
    qp.x_hi.assign(n, kUnbounded);
    for (std::size_t c = 0; c < aug.n_u; ++c) {
        qp.x_lo[aug.n_x + c] = cfg.u_min[c] - aug.op.u_c[c];
        qp.x_hi[aug.n_x + c] = cfg.u_max[c] - aug.op.u_c[c];
    }
    qp.y_lo = sub(cfg.y_min, aug.op.y_c);
    qp.y_hi = sub(cfg.y_max, aug.op.y_c);
    return qp;
}

double SparseQp::objective(std::span<const double> z) const
{
    double f = 0.0;
    for (std::size_t t = 0; t < horizon; ++t) {
        std::span<const double> u = z.subspan(u_offset(t), n_u);
        std::span<const double> x = z.subspan(x_offset(t), n_aug());
        f += 0.5 * dot(u, R * u);
        f += 0.5 * dot(x, Q * x) + dot(q, x);
    }
    return f;
}

Vector SparseQp::equality_residual(std::span<const double> z) const
{
    const std::size_t n = n_aug();
    Vector res(horizon * n);
    for (std::size_t t = 0; t < horizon; ++t) {
        std::span<const double> prev = t == 0 ? std::span<const double>(x0)
                                              : z.subspan(x_offset(t - 1), n);
        std::span<const double> u = z.subspan(u_offset(t), n_u);
        std::span<const double> x = z.subspan(x_offset(t), n);
        std::span<double> r(res.data() + t * n, n);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = x[i] - e[i];
        }
        gemv_acc(A, prev, -1.0, r);
        gemv_acc(B, u, -1.0, r);
    }
    return res;
}

Vector SparseQp::rollout(std::span<const double> increments) const
{
    if (increments.size() != horizon * n_u) {
        throw AssemblyError("rollout: increment sequence has the wrong length");
    }
    Vector z(n(), 0.0);
    Vector x = x0;
    for (std::size_t t = 0; t < horizon; ++t) {
        std::span<const double> u = increments.subspan(t * n_u, n_u);
        std::copy(u.begin(), u.end(), z.begin() + static_cast<long>(u_offset(t)));
        Vector next = e;
        gemv_acc(A, x, 1.0, next);
        gemv_acc(B, u, 1.0, next);
        std::copy(next.begin(), next.end(), z.begin() + static_cast<long>(x_offset(t)));
        x = std::move(next);
    }
    return z;
}

DenseQp SparseQp::as_dense() const
{
    const std::size_t n = n_aug();
    const std::size_t nz = this->n();
    DenseQp qp;
    qp.H = Matrix(nz, nz);
    qp.h.assign(nz, 0.0);
    qp.A_eq = Matrix(horizon * n, nz);
    qp.b_eq.assign(horizon * n, 0.0);
    qp.z_l.resize(nz);
    qp.z_u.resize(nz);
    qp.constant = constant;

    std::size_t out_rows = 0;
    for (std::size_t c = 0; c < n_y; ++c) {
        if (is_bounded(y_lo[c]) || is_bounded(y_hi[c])) {
            ++out_rows;
        }
    }
    qp.G = Matrix(horizon * out_rows, nz);

    std::size_t grow = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
        const std::size_t uo = u_offset(t);
        const std::size_t xo = x_offset(t);
        qp.H.set_block(uo, uo, R);
        qp.H.set_block(xo, xo, Q);
        for (std::size_t i = 0; i < n; ++i) {
            qp.h[xo + i] = q[i];
        }
        for (std::size_t c = 0; c < n_u; ++c) {
            qp.z_l[uo + c] = du_lo[c];
            qp.z_u[uo + c] = du_hi[c];
        }
        for (std::size_t i = 0; i < n; ++i) {
            qp.z_l[xo + i] = x_lo[i];
            qp.z_u[xo + i] = x_hi[i];
        }

        // X_{t+1} - A X_t - B U_t = e  (+ A x0 on the first stage)
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = t * n + i;
            qp.A_eq(r, xo + i) = 1.0;
            for (std::size_t c = 0; c < n_u; ++c) {
                qp.A_eq(r, uo + c) = -B(i, c);
            }
            if (t > 0) {
                const std::size_t po = x_offset(t - 1);
                for (std::size_t j = 0; j < n; ++j) {
                    qp.A_eq(r, po + j) = -A(i, j);
                }
            }
            qp.b_eq[r] = e[i];
            if (t == 0) {
                qp.b_eq[r] += dot(A.row(i), x0);
            }
        }

        for (std::size_t c = 0; c < n_y; ++c) {
            if (!is_bounded(y_lo[c]) && !is_bounded(y_hi[c])) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                qp.G(grow, xo + j) = C(c, j);
            }
            qp.g_l.push_back(y_lo[c]);
            qp.g_u.push_back(y_hi[c]);
            ++grow;
        }
    }
    return qp;
}

}  // namespace slmpc
