#include "slmpc/condensing.hpp"

#include <string>

#include "slmpc/errors.hpp"

namespace slmpc {

namespace {

void check_dims(const AugmentedModel& aug, const MpcConfig& cfg, std::span<const double> x0_aug)
{
    const std::size_t n = aug.n_aug();
    if (aug.A_hat.rows() != n || aug.A_hat.cols() != n || aug.B_hat.rows() != n ||
        aug.B_hat.cols() != aug.n_u || aug.C_hat.rows() != aug.n_y || aug.C_hat.cols() != n ||
        aug.e_hat.size() != n) {
        throw AssemblyError("augmented model blocks are inconsistent with its dimensions");
    }
    if (x0_aug.size() != n) {
        throw AssemblyError("x0_aug has length " + std::to_string(x0_aug.size()) + ", expected " +
                            std::to_string(n));
    }
    if (aug.op.u_c.size() != aug.n_u || aug.op.y_c.size() != aug.n_y) {
        throw AssemblyError("augmented model operating point has the wrong dimensions");
    }
    cfg.validate(aug.n_u, aug.n_y);
}

}  // namespace

PredictionMatrices build_prediction_matrices(const AugmentedModel& aug, std::size_t horizon)
{
    const std::size_t n = aug.n_aug();
    const std::size_t nu = aug.n_u;
    const std::size_t ny = aug.n_y;
    const std::size_t T = horizon;
    if (T < 1) {
        throw AssemblyError("horizon must be at least 1");
    }

    PredictionMatrices p;
    p.M = Matrix(T * n, T * nu);
    p.m.assign(T * n, 0.0);
    p.G = Matrix(T * ny, T * n);

    // Block (i, j) = A^(i-j) B; block row i is block row i-1 left-multiplied
    // by A with B appended on the diagonal.
    Matrix power_b = aug.B_hat;
    for (std::size_t d = 0; d < T; ++d) {
        for (std::size_t j = 0; j + d < T; ++j) {
            p.M.set_block((j + d) * n, j * nu, power_b);
        }
        if (d + 1 < T) {
            power_b = aug.A_hat * power_b;
        }
    }

    std::copy(aug.e_hat.begin(), aug.e_hat.end(), p.m.begin());
    for (std::size_t i = 1; i < T; ++i) {
        std::span<const double> prev(p.m.data() + (i - 1) * n, n);
        std::span<double> cur(p.m.data() + i * n, n);
        std::copy(aug.e_hat.begin(), aug.e_hat.end(), cur.begin());
        gemv_acc(aug.A_hat, prev, 1.0, cur);
    }

    for (std::size_t i = 0; i < T; ++i) {
        p.G.set_block(i * ny, i * n, aug.C_hat);
    }
    return p;
}

double CondensedQp::objective(std::span<const double> z) const
{
    const Vector hz = H * z;
    return 0.5 * dot(z, hz) + dot(h, z);
}

DenseQp CondensedQp::as_dense() const
{
    DenseQp qp;
    qp.H = H;
    qp.h = h;
    qp.A_eq = Matrix(0, n());
    qp.G = G;
    qp.g_l = g_l;
    qp.g_u = g_u;
    qp.z_l = z_l;
    qp.z_u = z_u;
    qp.constant = constant;
    return qp;
}

CondensedQp build_condensed_qp(const AugmentedModel& aug, const MpcConfig& cfg,
                               std::span<const double> x0_aug)
{
    check_dims(aug, cfg, x0_aug);
    const std::size_t n = aug.n_aug();
    const std::size_t nx = aug.n_x;
    const std::size_t nu = aug.n_u;
    const std::size_t ny = aug.n_y;
    const std::size_t T = cfg.horizon;
    const std::size_t nz = T * nu;

    const PredictionMatrices pm = build_prediction_matrices(aug, T);

    // Drift shifted by the free response of x0_aug: m~_i = A m~_{i-1} + e, m~_{-1} = x0.
    Vector m_tilde(T * n);
    {
        Vector prev(x0_aug.begin(), x0_aug.end());
        for (std::size_t i = 0; i < T; ++i) {
            std::span<double> cur(m_tilde.data() + i * n, n);
            std::copy(aug.e_hat.begin(), aug.e_hat.end(), cur.begin());
            gemv_acc(aug.A_hat, prev, 1.0, cur);
            prev.assign(cur.begin(), cur.end());
        }
    }

    // GM and Gm~ exploit the block-diagonal G: block row i is C times block row i of M.
    Matrix gm(T * ny, nz);
    Vector gm_free(T * ny);
    for (std::size_t i = 0; i < T; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            gm.set_block(i * ny, j * nu, aug.C_hat * pm.M.block(i * n, j * nu, n, nu));
        }
        const Vector yi = aug.C_hat * std::span<const double>(m_tilde.data() + i * n, n);
        std::copy(yi.begin(), yi.end(), gm_free.begin() + static_cast<long>(i * ny));
    }

    const Vector dr = sub(cfg.r, aug.op.y_c);

    CondensedQp qp;
    qp.H = Matrix(nz, nz);
    qp.h.assign(nz, 0.0);

    // H = (GM)' W (GM) + blockdiag(W_du); h = (GM)' W (Gm~ - dr).
    Matrix w_gm(T * ny, nz);
    Vector w_res(T * ny);
    for (std::size_t i = 0; i < T; ++i) {
        w_gm.set_block(i * ny, 0, cfg.W_y * gm.block(i * ny, 0, ny, nz));
        Vector res(ny);
        for (std::size_t c = 0; c < ny; ++c) {
            res[c] = gm_free[i * ny + c] - dr[c];
        }
        const Vector wr = cfg.W_y * res;
        std::copy(wr.begin(), wr.end(), w_res.begin() + static_cast<long>(i * ny));
        qp.constant += 0.5 * dot(res, wr);
    }
    qp.H = gm.transpose() * w_gm;
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t a = 0; a < nu; ++a) {
            for (std::size_t b = 0; b < nu; ++b) {
                qp.H(t * nu + a, t * nu + b) += cfg.W_du(a, b);
            }
        }
    }
    // Symmetrise away roundoff from the two product orders.
    for (std::size_t a = 0; a < nz; ++a) {
        for (std::size_t b = a + 1; b < nz; ++b) {
            const double s = 0.5 * (qp.H(a, b) + qp.H(b, a));
            qp.H(a, b) = s;
            qp.H(b, a) = s;
        }
    }
    gemv_t_acc(gm, w_res, 1.0, qp.h);

    qp.z_l.resize(nz);
    qp.z_u.resize(nz);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < nu; ++c) {
            qp.z_l[t * nu + c] = cfg.du_min[c];
            qp.z_u[t * nu + c] = cfg.du_max[c];
        }
    }

    // General rows. Input accumulation: dU_t = du_prev + sum_{k<=t} U_k.
    std::vector<Vector> rows;
    Vector lo, hi;
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < nu; ++c) {
            if (!is_bounded(cfg.u_min[c]) && !is_bounded(cfg.u_max[c])) {
                continue;
            }
            Vector row(nz, 0.0);
            for (std::size_t k = 0; k <= t; ++k) {
                row[k * nu + c] = 1.0;
            }
            const double du_prev = x0_aug[nx + c];
            rows.push_back(std::move(row));
            lo.push_back(cfg.u_min[c] - aug.op.u_c[c] - du_prev);
            hi.push_back(cfg.u_max[c] - aug.op.u_c[c] - du_prev);
        }
    }
    qp.input_rows = rows.size();
    // Output rows for dY_1 .. dY_T.
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t c = 0; c < ny; ++c) {
            if (!is_bounded(cfg.y_min[c]) && !is_bounded(cfg.y_max[c])) {
                continue;
            }
            const auto src = gm.row(t * ny + c);
            rows.emplace_back(src.begin(), src.end());
            const double free = gm_free[t * ny + c];
            lo.push_back(cfg.y_min[c] - aug.op.y_c[c] - free);
            hi.push_back(cfg.y_max[c] - aug.op.y_c[c] - free);
        }
    }
    qp.G = Matrix(rows.size(), nz);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::copy(rows[r].begin(), rows[r].end(), qp.G.row(r).begin());
    }
    qp.g_l = std::move(lo);
    qp.g_u = std::move(hi);
    return qp;
}

}  // namespace slmpc
