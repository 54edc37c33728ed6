#include "slmpc/active_set.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "slmpc/errors.hpp"

namespace slmpc {

void ActiveSetWorkspace::reset()
{
    working_set.clear();
    previous_z.clear();
    cached_hessian = Matrix();
    hessian_factor.reset();
}

namespace {

// Inequality in normalised form  a'v >= b  over v = [z; s].
struct Con {
    WorkingConstraint id;
    bool slack = false;  // the elastic bound s >= 0
};

class ElasticProblem {
public:
    ElasticProblem(const CondensedQp& qp, const Cholesky& hfac) : qp_(qp), hfac_(hfac) {}

    std::size_t n() const { return qp_.n(); }
    std::size_t nv() const { return n() + (elastic_ ? 1 : 0); }
    bool elastic() const { return elastic_; }

    void enter_elastic(double mu, double eps)
    {
        elastic_ = true;
        mu_ = mu;
        eps_ = eps;
    }
    void leave_elastic() { elastic_ = false; }
    double mu() const { return mu_; }
    void set_mu(double mu) { mu_ = mu; }

    double value(const Con& c, std::span<const double> v) const
    {
        if (c.slack) {
            return v[n()];
        }
        const double s = elastic_ && c.id.kind == ConstraintKind::General ? v[n()] : 0.0;
        const double raw = c.id.kind == ConstraintKind::Bound ? v[c.id.index]
                                                              : dot(qp_.G.row(c.id.index), v.first(n()));
        return (c.id.upper ? -raw : raw) + s;
    }

    double rhs(const Con& c) const
    {
        if (c.slack) {
            return 0.0;
        }
        if (c.id.kind == ConstraintKind::Bound) {
            return c.id.upper ? -qp_.z_u[c.id.index] : qp_.z_l[c.id.index];
        }
        return c.id.upper ? -qp_.g_u[c.id.index] : qp_.g_l[c.id.index];
    }

    void normal(const Con& c, std::span<double> out) const
    {
        std::fill(out.begin(), out.end(), 0.0);
        if (c.slack) {
            out[n()] = 1.0;
            return;
        }
        const double sign = c.id.upper ? -1.0 : 1.0;
        if (c.id.kind == ConstraintKind::Bound) {
            out[c.id.index] = sign;
            return;
        }
        const auto row = qp_.G.row(c.id.index);
        for (std::size_t j = 0; j < n(); ++j) {
            out[j] = sign * row[j];
        }
        if (elastic_) {
            out[n()] = 1.0;
        }
    }

    double normal_dot(const Con& c, std::span<const double> p) const
    {
        if (c.slack) {
            return p[n()];
        }
        const double sign = c.id.upper ? -1.0 : 1.0;
        double d = c.id.kind == ConstraintKind::Bound ? p[c.id.index]
                                                      : dot(qp_.G.row(c.id.index), p.first(n()));
        d *= sign;
        if (elastic_ && c.id.kind == ConstraintKind::General) {
            d += p[n()];
        }
        return d;
    }

    double normal_norm(const Con& c) const
    {
        if (c.slack || c.id.kind == ConstraintKind::Bound) {
            return 1.0;
        }
        double s = dot(qp_.G.row(c.id.index), qp_.G.row(c.id.index));
        if (elastic_) {
            s += 1.0;
        }
        return std::sqrt(s);
    }

    void apply_hinv(std::span<double> x) const
    {
        hfac_.solve_in_place(x.first(n()));
        if (elastic_) {
            x[n()] /= eps_;
        }
    }

    Vector gradient(std::span<const double> v) const
    {
        Vector g = qp_.H * v.first(n());
        for (std::size_t i = 0; i < n(); ++i) {
            g[i] += qp_.h[i];
        }
        if (elastic_) {
            g.push_back(mu_ + eps_ * v[n()]);
        }
        return g;
    }

    // Every finite side not in the working set, plus the slack bound.
    template <typename F>
    void for_each_inactive(const std::vector<Con>& working, F&& f) const
    {
        auto in_working = [&](const WorkingConstraint& id) {
            return std::any_of(working.begin(), working.end(),
                               [&](const Con& c) { return !c.slack && c.id == id; });
        };
        for (std::size_t k = 0; k < n(); ++k) {
            for (bool upper : {false, true}) {
                const double b = upper ? qp_.z_u[k] : qp_.z_l[k];
                if (!is_bounded(b)) {
                    continue;
                }
                const WorkingConstraint id{ConstraintKind::Bound, k, upper};
                if (!in_working(id)) {
                    f(Con{id, false});
                }
            }
        }
        for (std::size_t i = 0; i < qp_.G.rows(); ++i) {
            for (bool upper : {false, true}) {
                const double b = upper ? qp_.g_u[i] : qp_.g_l[i];
                if (!is_bounded(b)) {
                    continue;
                }
                const WorkingConstraint id{ConstraintKind::General, i, upper};
                if (!in_working(id)) {
                    f(Con{id, false});
                }
            }
        }
        if (elastic_) {
            f(Con{{ConstraintKind::Bound, 0, false}, true});
        }
    }

    double general_violation(std::span<const double> z) const
    {
        double v = 0.0;
        for (std::size_t i = 0; i < qp_.G.rows(); ++i) {
            const double gz = dot(qp_.G.row(i), z);
            v = std::max({v, qp_.g_l[i] - gz, gz - qp_.g_u[i]});
        }
        return v;
    }

    double total_violation(std::span<const double> z) const
    {
        double v = general_violation(z);
        for (std::size_t k = 0; k < n(); ++k) {
            v = std::max({v, qp_.z_l[k] - z[k], z[k] - qp_.z_u[k]});
        }
        return v;
    }

private:
    const CondensedQp& qp_;
    const Cholesky& hfac_;
    bool elastic_ = false;
    double mu_ = 0.0;
    double eps_ = 1.0;
};

struct EqpResult {
    Vector p;
    Vector lambda;
};

// min 1/2 p'Hp + g'p  s.t.  a_i'p = r_i  (i in working), by the range-space
// method. Empty when the working rows are numerically dependent.
std::optional<EqpResult> solve_eqp(const ElasticProblem& prob, std::span<const double> g,
                                   const std::vector<Con>& working, std::span<const double> r)
{
    const std::size_t nv = prob.nv();
    const std::size_t k = working.size();
    EqpResult out;
    Vector hinv_g(g.begin(), g.end());
    prob.apply_hinv(hinv_g);

    if (k == 0) {
        out.p = scaled(hinv_g, -1.0);
        return out;
    }

    // Y = H^-1 A', S = A Y.
    std::vector<Vector> a(k, Vector(nv));
    std::vector<Vector> y(k);
    for (std::size_t i = 0; i < k; ++i) {
        prob.normal(working[i], a[i]);
        y[i] = a[i];
        prob.apply_hinv(y[i]);
    }
    Matrix schur(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = dot(a[i], y[j]);
            schur(i, j) = v;
            schur(j, i) = v;
        }
    }
    const auto fac = Cholesky::factor(schur);
    if (!fac || fac->condition_estimate() > kMaxWorkingSetCondition) {
        return std::nullopt;
    }
    // S lambda = r + A H^-1 g
    out.lambda.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        out.lambda[i] = (r.empty() ? 0.0 : r[i]) + dot(a[i], hinv_g);
    }
    fac->solve_in_place(out.lambda);
    // p = H^-1 (A' lambda - g) = Y lambda - H^-1 g
    out.p = scaled(hinv_g, -1.0);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < nv; ++j) {
            out.p[j] += out.lambda[i] * y[i][j];
        }
    }
    return out;
}

bool independent(const ElasticProblem& prob, const std::vector<Con>& working)
{
    const Vector g(prob.nv(), 0.0);
    return solve_eqp(prob, g, working, {}).has_value();
}

// Keeps the longest prefix-greedy subset whose rows stay independent.
std::vector<Con> filter_independent(const ElasticProblem& prob, const std::vector<Con>& cands)
{
    std::vector<Con> kept;
    for (const Con& c : cands) {
        kept.push_back(c);
        if (!independent(prob, kept)) {
            kept.pop_back();
        }
    }
    return kept;
}

bool valid_for(const CondensedQp& qp, const WorkingConstraint& id)
{
    if (id.kind == ConstraintKind::Bound) {
        return id.index < qp.n() && is_bounded(id.upper ? qp.z_u[id.index] : qp.z_l[id.index]);
    }
    return id.index < qp.G.rows() && is_bounded(id.upper ? qp.g_u[id.index] : qp.g_l[id.index]);
}

}  // namespace

QpSolution solve_condensed_activeset(const CondensedQp& qp, ActiveSetWorkspace& ws, double tol,
                                     int max_iter)
{
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = qp.n();
    if (qp.H.rows() != n || qp.H.cols() != n || qp.z_l.size() != n || qp.z_u.size() != n ||
        qp.G.cols() != (qp.G.rows() ? n : qp.G.cols()) || qp.g_l.size() != qp.G.rows() ||
        qp.g_u.size() != qp.G.rows()) {
        throw AssemblyError("active-set: inconsistent QP dimensions");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("active-set: tol must be positive");
    }

    if (!ws.hessian_factor || ws.cached_hessian != qp.H) {
        ws.hessian_factor = Cholesky::factor(qp.H);
        if (!ws.hessian_factor) {
            ws.cached_hessian = Matrix();
            throw SolverError("active-set: Hessian is not positive definite");
        }
        ws.cached_hessian = qp.H;
        ++ws.factorizations;
    }
    ElasticProblem prob(qp, *ws.hessian_factor);

    auto clip = [&](Vector z) {
        for (std::size_t k = 0; k < n; ++k) {
            z[k] = std::clamp(z[k], qp.z_l[k], qp.z_u[k]);
        }
        return z;
    };
    auto to_con = [](const WorkingConstraint& id) { return Con{id, false}; };

    // Start point and working set.
    std::vector<Con> working;
    Vector v(n, 0.0);
    {
        std::vector<Con> warm;
        for (const auto& id : ws.working_set) {
            if (valid_for(qp, id)) {
                warm.push_back(to_con(id));
            }
        }
        warm = filter_independent(prob, warm);
        Vector guess = ws.previous_z.size() == n ? ws.previous_z : Vector(n, 0.0);
        if (!warm.empty()) {
            Vector r(warm.size());
            for (std::size_t i = 0; i < warm.size(); ++i) {
                r[i] = prob.rhs(warm[i]);
            }
            if (auto eq = solve_eqp(prob, qp.h, warm, r)) {
                guess = std::move(eq->p);
            }
        }
        v = clip(guess);
        if (!warm.empty() && prob.total_violation(guess) <= tol) {
            working = std::move(warm);
        } else {
            // Keep the warm box sides the clipped start actually sits on.
            for (const Con& c : warm) {
                if (c.id.kind == ConstraintKind::Bound &&
                    std::abs(prob.value(c, v) - prob.rhs(c)) <= tol) {
                    working.push_back(c);
                }
            }
        }
    }

    const double h_scale = std::max(1.0, max_abs(qp.H));
    const double mu0 = 1e4 * std::max({1.0, norm_inf(qp.h), h_scale});
    const double mu_cap = mu0 * 1e6;
    if (const double viol = prob.general_violation(v); viol > tol) {
        prob.enter_elastic(mu0, h_scale);
        v.push_back(viol);
        // Elastic rows are relaxed, so only box sides stay in the working set.
        std::erase_if(working, [](const Con& c) { return c.id.kind == ConstraintKind::General; });
    }

    QpSolution sol;
    sol.status = SolveStatus::MaxIterations;
    Vector lambda;
    int iter = 0;

    // Returns true when the current point is optimal for the current phase;
    // otherwise drops the most negative multiplier.
    auto kkt_or_drop = [&](const Vector& lam) {
        if (lam.empty()) {
            return true;
        }
        const auto it = std::min_element(lam.begin(), lam.end());
        if (*it >= -tol) {
            return true;
        }
        working.erase(working.begin() + (it - lam.begin()));
        return false;
    };
    // Optimal for the elastic phase but with a positive slack: raise mu or give up.
    auto elastic_stuck = [&]() -> bool {
        if (prob.mu() < mu_cap) {
            prob.set_mu(prob.mu() * 100.0);
            return false;
        }
        sol.status = SolveStatus::Infeasible;
        return true;
    };

    while (true) {
        if (iter >= max_iter) {
            sol.status = SolveStatus::MaxIterations;
            break;
        }
        const Vector g = prob.gradient(v);
        auto eq = solve_eqp(prob, g, working, {});
        ++iter;
        if (!eq) {
            working.pop_back();
            continue;
        }
        lambda = eq->lambda;
        const Vector& p = eq->p;
        const double pnorm = norm_inf(p);

        // No usable step: optimal for this phase, or drop a constraint.
        auto at_stationary_point = [&]() {
            if (kkt_or_drop(lambda)) {
                if (prob.elastic()) {
                    return elastic_stuck();
                }
                sol.status = SolveStatus::Converged;
                return true;
            }
            return false;
        };

        if (pnorm <= 1e-13 * (1.0 + norm_inf(v))) {
            if (at_stationary_point()) {
                break;
            }
            continue;
        }

        double alpha = 1.0;
        std::optional<Con> blocking;
        prob.for_each_inactive(working, [&](const Con& c) {
            const double ap = prob.normal_dot(c, p);
            if (ap < -1e-12 * prob.normal_norm(c) * pnorm) {
                const double dist = std::max(0.0, (prob.rhs(c) - prob.value(c, v)) / ap);
                if (dist < alpha) {
                    alpha = dist;
                    blocking = c;
                }
            }
        });
        for (std::size_t j = 0; j < v.size(); ++j) {
            v[j] += alpha * p[j];
        }

        if (blocking) {
            if (blocking->slack) {
                // Feasible for the original problem: drop the slack.
                prob.leave_elastic();
                v.resize(n);
                working = filter_independent(prob, working);
            } else {
                working.push_back(*blocking);
                if (!independent(prob, working)) {
                    working.pop_back();
                    // A dependent side blocking with no progress means p is
                    // round-off; adding nothing would repeat this iteration.
                    if (alpha == 0.0 && at_stationary_point()) {
                        break;
                    }
                }
            }
            continue;
        }

        // Full step: lambda is already the multiplier estimate at the new point.
        if (at_stationary_point()) {
            break;
        }
    }

    sol.z.assign(v.begin(), v.begin() + static_cast<long>(n));
    sol.objective = qp.objective(sol.z);
    sol.outer_iterations = iter;
    sol.inner_iterations = iter;
    sol.y_bound.assign(n, 0.0);
    sol.y_general.assign(qp.G.rows(), 0.0);
    if (!prob.elastic() && lambda.size() == working.size()) {
        for (std::size_t i = 0; i < working.size(); ++i) {
            const auto& id = working[i].id;
            const double y = id.upper ? -lambda[i] : lambda[i];
            (id.kind == ConstraintKind::Bound ? sol.y_bound : sol.y_general)[id.index] = y;
        }
    }
    sol.primal_residual = prob.total_violation(sol.z);
    {
        Vector g = qp.H * sol.z;
        for (std::size_t i = 0; i < n; ++i) {
            g[i] += qp.h[i] - sol.y_bound[i];
        }
        if (qp.G.rows() > 0) {
            gemv_t_acc(qp.G, sol.y_general, -1.0, g);
        }
        sol.dual_residual = norm_inf(g);
    }
    if (sol.status == SolveStatus::Converged && sol.primal_residual > tol) {
        sol.status = SolveStatus::MaxIterations;
    }

    ws.working_set.clear();
    if (!prob.elastic()) {
        for (const Con& c : working) {
            ws.working_set.push_back(c.id);
        }
    }
    ws.previous_z = sol.z;
    sol.solve_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return sol;
}

}  // namespace slmpc
