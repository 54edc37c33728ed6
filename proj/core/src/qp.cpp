#include "slmpc/qp.hpp"

#include <algorithm>
#include <cmath>

#include "slmpc/mpc_config.hpp"

namespace slmpc {

double DenseQp::objective(std::span<const double> z) const
{
    const Vector hz = H * z;
    return 0.5 * dot(z, hz) + dot(h, z);
}

std::string_view to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Converged:
        return "converged";
    case SolveStatus::MaxIterations:
        return "max-iterations";
    case SolveStatus::Infeasible:
        return "infeasible";
    }
    return "unknown";
}

double kkt_stationarity(const DenseQp& qp, const QpSolution& sol)
{
    Vector g = qp.H * sol.z;
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] += qp.h[i];
    }
    if (sol.y_eq.size() == qp.A_eq.rows() && qp.A_eq.rows() > 0) {
        gemv_t_acc(qp.A_eq, sol.y_eq, -1.0, g);
    }
    if (sol.y_general.size() == qp.G.rows() && qp.G.rows() > 0) {
        gemv_t_acc(qp.G, sol.y_general, -1.0, g);
    }
    if (sol.y_bound.size() == g.size()) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            g[i] -= sol.y_bound[i];
        }
    }
    return norm_inf(g);
}

double primal_violation(const DenseQp& qp, std::span<const double> z)
{
    double v = 0.0;
    if (qp.A_eq.rows() > 0) {
        const Vector ax = qp.A_eq * z;
        v = std::max(v, max_abs_diff(ax, qp.b_eq));
    }
    if (qp.G.rows() > 0) {
        const Vector gz = qp.G * z;
        for (std::size_t i = 0; i < gz.size(); ++i) {
            v = std::max({v, qp.g_l[i] - gz[i], gz[i] - qp.g_u[i]});
        }
    }
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!qp.z_l.empty()) {
            v = std::max(v, qp.z_l[i] - z[i]);
        }
        if (!qp.z_u.empty()) {
            v = std::max(v, z[i] - qp.z_u[i]);
        }
    }
    return v;
}

}  // namespace slmpc
