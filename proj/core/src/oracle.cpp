#include "slmpc/oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "slmpc/mpc_config.hpp"

namespace slmpc {

namespace {

struct Side {
    bool general;      // general row or box coordinate
    std::size_t index;
    bool upper;
    double bound;
};

std::vector<Side> collect_sides(const DenseQp& qp)
{
    std::vector<Side> sides;
    for (std::size_t k = 0; k < qp.n(); ++k) {
        if (!qp.z_l.empty() && is_bounded(qp.z_l[k])) {
            sides.push_back({false, k, false, qp.z_l[k]});
        }
        if (!qp.z_u.empty() && is_bounded(qp.z_u[k])) {
            sides.push_back({false, k, true, qp.z_u[k]});
        }
    }
    for (std::size_t i = 0; i < qp.G.rows(); ++i) {
        if (is_bounded(qp.g_l[i])) {
            sides.push_back({true, i, false, qp.g_l[i]});
        }
        if (is_bounded(qp.g_u[i])) {
            sides.push_back({true, i, true, qp.g_u[i]});
        }
    }
    return sides;
}

}  // namespace

std::size_t count_inequality_sides(const DenseQp& qp) { return collect_sides(qp).size(); }

QpSolution solve_oracle_bruteforce(const DenseQp& qp)
{
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = qp.n();
    const std::size_t n_eq = qp.A_eq.rows();
    const std::vector<Side> sides = collect_sides(qp);
    if (sides.size() > kOracleMaxConstraints) {
        throw std::invalid_argument("oracle: " + std::to_string(sides.size()) +
                                    " inequality sides exceed the enumeration bound");
    }
    const std::size_t m = sides.size();
    const std::size_t max_active = n >= n_eq ? n - n_eq : 0;

    const double scale = 1.0 + norm_inf(qp.h) + max_abs(qp.H);
    const double feas_tol = 1e-9 * scale;
    const double dual_tol = 1e-9 * scale;

    QpSolution best;
    best.status = SolveStatus::Infeasible;
    best.objective = std::numeric_limits<double>::infinity();

    std::vector<std::size_t> active;
    std::size_t candidates = 0;

    auto evaluate = [&]() {
        ++candidates;
        const std::size_t k = n_eq + active.size();
        Matrix kkt(n + k, n + k);
        Vector rhs(n + k, 0.0);
        kkt.set_block(0, 0, qp.H);
        for (std::size_t i = 0; i < n; ++i) {
            rhs[i] = -qp.h[i];
        }
        // Row r of the active matrix A enters as [H -A'; A 0].
        auto put_row = [&](std::size_t r, std::span<const double> a, double b) {
            for (std::size_t j = 0; j < n; ++j) {
                kkt(n + r, j) = a[j];
                kkt(j, n + r) = -a[j];
            }
            rhs[n + r] = b;
        };
        for (std::size_t r = 0; r < n_eq; ++r) {
            put_row(r, qp.A_eq.row(r), qp.b_eq[r]);
        }
        Vector unit(n, 0.0);
        for (std::size_t a = 0; a < active.size(); ++a) {
            const Side& s = sides[active[a]];
            if (s.general) {
                put_row(n_eq + a, qp.G.row(s.index), s.bound);
            } else {
                std::fill(unit.begin(), unit.end(), 0.0);
                unit[s.index] = 1.0;
                put_row(n_eq + a, unit, s.bound);
            }
        }
        const auto lu = Lu::factor(kkt, 1e-12);
        if (!lu) {
            return;
        }
        const Vector sol = lu->solve(rhs);
        std::span<const double> z(sol.data(), n);
        if (primal_violation(qp, z) > feas_tol) {
            return;
        }
        for (std::size_t a = 0; a < active.size(); ++a) {
            const double y = sol[n + n_eq + a];
            const bool upper = sides[active[a]].upper;
            if ((!upper && y < -dual_tol) || (upper && y > dual_tol)) {
                return;
            }
        }
        const double obj = qp.objective(z);
        if (obj >= best.objective) {
            return;
        }
        best.objective = obj;
        best.status = SolveStatus::Converged;
        best.z.assign(z.begin(), z.end());
        best.y_eq.assign(sol.begin() + static_cast<long>(n), sol.begin() + static_cast<long>(n + n_eq));
        best.y_bound.assign(n, 0.0);
        best.y_general.assign(qp.G.rows(), 0.0);
        for (std::size_t a = 0; a < active.size(); ++a) {
            const Side& s = sides[active[a]];
            (s.general ? best.y_general : best.y_bound)[s.index] = sol[n + n_eq + a];
        }
    };

    // Depth-first enumeration of subsets in index order; both sides of the
    // same row or coordinate are never active together.
    auto conflicts = [&](std::size_t cand) {
        for (std::size_t a : active) {
            if (sides[a].general == sides[cand].general && sides[a].index == sides[cand].index) {
                return true;
            }
        }
        return false;
    };
    auto recurse = [&](auto&& self, std::size_t from) -> void {
        evaluate();
        if (active.size() == max_active) {
            return;
        }
        for (std::size_t c = from; c < m; ++c) {
            if (conflicts(c)) {
                continue;
            }
            active.push_back(c);
            self(self, c + 1);
            active.pop_back();
        }
    };
    recurse(recurse, 0);

    best.outer_iterations = static_cast<int>(candidates);
    if (best.converged()) {
        best.primal_residual = primal_violation(qp, best.z);
        best.dual_residual = kkt_stationarity(qp, best);
    }
    best.solve_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return best;
}

QpSolution solve_oracle_bruteforce(const CondensedQp& qp)
{
    return solve_oracle_bruteforce(qp.as_dense());
}

}  // namespace slmpc
