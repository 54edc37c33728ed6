#include "slmpc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "slmpc/errors.hpp"

namespace slmpc {

std::string_view to_string(Scheme s)
{
    switch (s) {
    case Scheme::MultiPid:
        return "multi-pid";
    case Scheme::SlMpc:
        return "sl-mpc";
    case Scheme::LtiMpc:
        return "lti-mpc";
    }
    return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name)
{
    for (Scheme s : {Scheme::MultiPid, Scheme::SlMpc, Scheme::LtiMpc}) {
        if (name == to_string(s)) {
            return s;
        }
    }
    return std::nullopt;
}

const Vector& setpoint_at(const std::vector<SetpointStep>& schedule, double t)
{
    if (schedule.empty()) {
        throw std::invalid_argument("setpoint schedule is empty");
    }
    auto it = std::upper_bound(schedule.begin(), schedule.end(), t,
                               [](double v, const SetpointStep& s) { return v < s.time; });
    return it == schedule.begin() ? schedule.front().value : std::prev(it)->value;
}

namespace {

std::size_t sample_count(double duration, double Ts)
{
    return static_cast<std::size_t>(std::llround(duration / Ts));
}

// Loop evaluation order so that every cascade source is evaluated before its
// consumer. Throws on unknown names or cycles.
std::vector<std::size_t> pid_order(const std::vector<PidLoop>& loops)
{
    const std::size_t n = loops.size();
    std::vector<std::optional<std::size_t>> source(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (loops[i].setpoint_kind != PidLoop::SetpointKind::Cascade) {
            continue;
        }
        auto it = std::find_if(loops.begin(), loops.end(),
                               [&](const PidLoop& l) { return l.name == loops[i].cascade_from; });
        if (it == loops.end()) {
            throw std::invalid_argument("PI loop '" + loops[i].name + "' cascades from unknown loop '" +
                                        loops[i].cascade_from + "'");
        }
        source[i] = static_cast<std::size_t>(it - loops.begin());
    }
    std::vector<std::size_t> order;
    std::vector<char> state(n, 0);  // 0 new, 1 visiting, 2 done
    auto visit = [&](auto&& self, std::size_t i) -> void {
        if (state[i] == 2) {
            return;
        }
        if (state[i] == 1) {
            throw std::invalid_argument("PI cascade cycle through loop '" + loops[i].name + "'");
        }
        state[i] = 1;
        if (source[i]) {
            self(self, *source[i]);
        }
        state[i] = 2;
        order.push_back(i);
    };
    for (std::size_t i = 0; i < n; ++i) {
        visit(visit, i);
    }
    return order;
}

}  // namespace

void Scenario::validate(const PlantModel& plant, const MpcConfig& cfg) const
{
    cfg.validate(plant.n_u, plant.n_y);
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("scenario duration must be positive");
    }
    if (sample_count(duration, cfg.Ts) == 0) {
        throw std::invalid_argument("scenario shorter than one sampling interval");
    }
    if (schedule.empty()) {
        throw std::invalid_argument("setpoint schedule is empty");
    }
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i].value.size() != plant.n_y) {
            throw std::invalid_argument("setpoint step " + std::to_string(i) + " has the wrong length");
        }
        if (schedule[i].time < 0.0 || schedule[i].time > duration) {
            throw std::invalid_argument("setpoint step time outside the scenario duration");
        }
        if (i > 0 && !(schedule[i].time > schedule[i - 1].time)) {
            throw std::invalid_argument("setpoint step times must be strictly increasing");
        }
    }
    if (x0.size() != plant.n_x || !all_finite(x0)) {
        throw std::invalid_argument("initial state has the wrong length or is not finite");
    }
    if (u0.size() != plant.n_u) {
        throw std::invalid_argument("initial input has the wrong length");
    }
    for (std::size_t k = 0; k < plant.n_u; ++k) {
        if (u0[k] < cfg.u_min[k] || u0[k] > cfg.u_max[k]) {
            throw std::invalid_argument("initial input outside [u_min, u_max]");
        }
    }
    if (substeps < 1) {
        throw std::invalid_argument("substeps must be at least 1");
    }
    if (!(noise_std >= 0.0)) {
        throw std::invalid_argument("noise standard deviation must be non-negative");
    }
    if (scheme != Scheme::MultiPid) {
        return;
    }
    if (pid.empty()) {
        throw std::invalid_argument("multi-pid scheme requires at least one PI loop");
    }
    std::vector<char> driven(plant.n_u, 0);
    for (const PidLoop& l : pid) {
        l.params.validate();
        const std::size_t limit = l.measured_kind == SignalKind::State ? plant.n_x : plant.n_y;
        if (l.measured_index >= limit) {
            throw std::invalid_argument("PI loop '" + l.name + "' measures an out-of-range signal");
        }
        if (l.setpoint_kind == PidLoop::SetpointKind::Reference && l.setpoint_index >= plant.n_y) {
            throw std::invalid_argument("PI loop '" + l.name + "' reads an out-of-range reference");
        }
        if (l.drives_input) {
            if (*l.drives_input >= plant.n_u) {
                throw std::invalid_argument("PI loop '" + l.name + "' drives an out-of-range input");
            }
            if (driven[*l.drives_input]++) {
                throw std::invalid_argument("plant input driven by more than one PI loop");
            }
        }
    }
    pid_order(pid);
}

Trace run_closed_loop(const PlantModel& plant, const MpcConfig& cfg, const Scenario& sc)
{
    sc.validate(plant, cfg);
    Trace trace;
    trace.scheme = sc.scheme;
    trace.n_x = plant.n_x;
    trace.n_u = plant.n_u;
    trace.n_y = plant.n_y;

    const std::size_t samples = sample_count(sc.duration, cfg.Ts);
    trace.rows.reserve(samples);
    const double h = cfg.Ts / sc.substeps;

    std::mt19937_64 rng(sc.seed);
    std::normal_distribution<double> noise(0.0, sc.noise_std > 0.0 ? sc.noise_std : 1.0);

    std::optional<MpcController> mpc;
    std::vector<std::size_t> order;
    std::vector<double> acc(sc.pid.size(), 0.0);
    std::vector<double> loop_out(sc.pid.size(), 0.0);
    if (sc.scheme == Scheme::MultiPid) {
        order = pid_order(sc.pid);
    } else {
        mpc.emplace(plant, cfg, sc.controller);
    }

    Vector x = sc.x0;
    Vector u_prev = sc.u0;
    int failures = 0;

    for (std::size_t k = 0; k < samples; ++k) {
        const double t = static_cast<double>(k) * cfg.Ts;
        TraceRow row;
        row.time = t;
        row.x = x;
        row.r = setpoint_at(sc.schedule, t);

        Vector xm = x;
        if (sc.noise_std > 0.0) {
            for (double& v : xm) {
                v += noise(rng);
            }
        }

        Vector u = u_prev;
        if (mpc) {
            const bool relin = k == 0 || (sc.scheme == Scheme::SlMpc && sc.relin_period > 0 &&
                                          k % sc.relin_period == 0);
            try {
                if (relin) {
                    mpc->relinearize(xm, u_prev);
                }
                mpc->set_reference(row.r);
                const QpSolution sol = mpc->solve(xm, u_prev);
                row.status = std::string(to_string(sol.status));
                row.iterations = sol.outer_iterations;
                row.solve_time = sol.solve_time;
                if (sol.converged()) {
                    u = extract_first_move(sol, cfg, u_prev);
                    failures = 0;
                } else {
                    ++failures;  // hold the previous input
                }
            } catch (const SolverError&) {
                row.status = "error";
                ++failures;
            } catch (const LinearizationError&) {
                row.status = "error";  // keep the previous model and input
                ++failures;
            }
            if (failures > kMaxConsecutiveFailures) {
                trace.aborted = true;
                trace.error = "solver failed " + std::to_string(failures) +
                              " consecutive times at t=" + std::to_string(t);
                break;
            }
        } else {
            const Vector ym = plant.eval_output(xm, u_prev);
            for (std::size_t i : order) {
                const PidLoop& l = sc.pid[i];
                const double meas =
                    l.measured_kind == SignalKind::State ? xm[l.measured_index] : ym[l.measured_index];
                double sp = l.setpoint_value;
                if (l.setpoint_kind == PidLoop::SetpointKind::Reference) {
                    sp = row.r[l.setpoint_index];
                } else if (l.setpoint_kind == PidLoop::SetpointKind::Cascade) {
                    const auto src = std::find_if(sc.pid.begin(), sc.pid.end(), [&](const PidLoop& o) {
                        return o.name == l.cascade_from;
                    });
                    sp = loop_out[static_cast<std::size_t>(src - sc.pid.begin())];
                }
                const PidStep step = step_pid(l.params, meas, sp, acc[i], cfg.Ts);
                acc[i] = step.accumulator;
                loop_out[i] = step.output;
                if (l.drives_input) {
                    u[*l.drives_input] = step.output;
                }
            }
            row.status = "pid";
        }
        for (std::size_t c = 0; c < plant.n_u; ++c) {
            u[c] = std::clamp(u[c], cfg.u_min[c], cfg.u_max[c]);
        }
        row.u = u;
        row.y = plant.eval_output(x, u);
        trace.rows.push_back(std::move(row));

        for (int s = 0; s < sc.substeps; ++s) {
            x = rk4_step(plant, x, u, h);
        }
        if (!all_finite(x)) {
            trace.aborted = true;
            trace.error = "plant diverged before t=" + std::to_string(t + cfg.Ts);
            break;
        }
        u_prev = std::move(u);
    }
    return trace;
}

}  // namespace slmpc
