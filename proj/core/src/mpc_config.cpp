#include "slmpc/mpc_config.hpp"

#include <cmath>
#include <string>

#include "slmpc/errors.hpp"

namespace slmpc {

MpcConfig MpcConfig::with_dims(std::size_t n_u, std::size_t n_y, double w_y, double w_du)
{
    MpcConfig cfg;
    cfg.W_y = Matrix::identity(n_y) * w_y;
    cfg.W_du = Matrix::identity(n_u) * w_du;
    cfg.du_min.assign(n_u, -kUnbounded);
    cfg.du_max.assign(n_u, kUnbounded);
    cfg.u_min.assign(n_u, -kUnbounded);
    cfg.u_max.assign(n_u, kUnbounded);
    cfg.y_min.assign(n_y, -kUnbounded);
    cfg.y_max.assign(n_y, kUnbounded);
    cfg.r.assign(n_y, 0.0);
    return cfg;
}

namespace {

void check_len(const Vector& v, std::size_t n, const char* name)
{
    if (v.size() != n) {
        throw AssemblyError(std::string("MpcConfig: ") + name + " has length " +
                            std::to_string(v.size()) + ", expected " + std::to_string(n));
    }
}

void check_order(const Vector& lo, const Vector& hi, const char* name)
{
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (std::isnan(lo[i]) || std::isnan(hi[i]) || lo[i] > hi[i]) {
            throw AssemblyError(std::string("MpcConfig: ") + name + " bounds out of order at index " +
                                std::to_string(i));
        }
    }
}

}  // namespace

void MpcConfig::validate(std::size_t nu, std::size_t ny) const
{
    if (horizon < 1) {
        throw AssemblyError("MpcConfig: horizon must be at least 1");
    }
    if (!(Ts > 0.0)) {
        throw AssemblyError("MpcConfig: Ts must be positive");
    }
    if (W_y.rows() != ny || W_y.cols() != ny) {
        throw AssemblyError("MpcConfig: W_y must be " + std::to_string(ny) + "x" + std::to_string(ny));
    }
    if (W_du.rows() != nu || W_du.cols() != nu) {
        throw AssemblyError("MpcConfig: W_du must be " + std::to_string(nu) + "x" +
                            std::to_string(nu));
    }
    check_len(du_min, nu, "du_min");
    check_len(du_max, nu, "du_max");
    check_len(u_min, nu, "u_min");
    check_len(u_max, nu, "u_max");
    check_len(y_min, ny, "y_min");
    check_len(y_max, ny, "y_max");
    check_len(r, ny, "r");
    check_order(du_min, du_max, "du");
    check_order(u_min, u_max, "u");
    check_order(y_min, y_max, "y");

    if (!is_symmetric(W_y, 1e-12 * std::max(1.0, max_abs(W_y)))) {
        throw AssemblyError("MpcConfig: W_y must be symmetric");
    }
    // PSD check: a tiny diagonal shift turns semidefinite into definite.
    Matrix shifted = W_y + Matrix::identity(ny) * (1e-12 * std::max(1.0, max_abs(W_y)));
    if (ny > 0 && !Cholesky::factor(shifted)) {
        throw AssemblyError("MpcConfig: W_y must be positive semidefinite");
    }
    if (!is_symmetric(W_du, 1e-12 * std::max(1.0, max_abs(W_du)))) {
        throw AssemblyError("MpcConfig: W_du must be symmetric");
    }
    if (nu > 0 && !Cholesky::factor(W_du)) {
        throw AssemblyError("MpcConfig: W_du must be positive definite");
    }
}

}  // namespace slmpc
