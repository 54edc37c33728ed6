#pragma once

// Closed-loop simulation of the three control schemes: multi-loop PI with
// cascades, successive-linearization MPC and fixed-linearization MPC.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slmpc/controller.hpp"
#include "slmpc/model.hpp"
#include "slmpc/mpc_config.hpp"
#include "slmpc/pid.hpp"

namespace slmpc {

enum class Scheme { MultiPid, SlMpc, LtiMpc };

std::string_view to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view name);

struct SetpointStep {
    double time = 0.0;
    Vector value;  // n_y

    bool operator==(const SetpointStep&) const = default;
};

/// Setpoint in force at time t (the last step with time <= t; the first step
/// before that).
const Vector& setpoint_at(const std::vector<SetpointStep>& schedule, double t);

enum class SignalKind { State, Output };

struct PidLoop {
    std::string name;
    PidParams params;

    SignalKind measured_kind = SignalKind::Output;
    std::size_t measured_index = 0;

    // Setpoint: a constant, channel j of the scenario reference, or the output
    // of another loop (cascade).
    enum class SetpointKind { Constant, Reference, Cascade };
    SetpointKind setpoint_kind = SetpointKind::Reference;
    double setpoint_value = 0.0;
    std::size_t setpoint_index = 0;  // reference channel
    std::string cascade_from;        // loop name

    // Plant input driven by this loop; empty for a loop that only feeds a
    // cascade setpoint.
    std::optional<std::size_t> drives_input;

    bool operator==(const PidLoop&) const = default;
};

struct Scenario {
    double duration = 0.0;
    std::vector<SetpointStep> schedule;
    Scheme scheme = Scheme::SlMpc;
    std::size_t relin_period = 1;  // 0: linearize only at t = 0

    Vector x0;  // initial plant state
    Vector u0;  // input applied before t = 0

    std::vector<PidLoop> pid;
    ControllerSettings controller;

    int substeps = 10;  // RK4 steps per sampling interval
    double noise_std = 0.0;
    std::uint64_t seed = 0;

    /// Throws std::invalid_argument describing the first inconsistency.
    void validate(const PlantModel& plant, const MpcConfig& cfg) const;

    bool operator==(const Scenario&) const = default;
};

struct TraceRow {
    double time = 0.0;
    Vector x, y, u, r;
    std::string status;  // solver status, or "pid"
    int iterations = 0;
    double solve_time = 0.0;  // seconds
};

struct Trace {
    Scheme scheme = Scheme::SlMpc;
    std::size_t n_x = 0, n_u = 0, n_y = 0;
    std::vector<TraceRow> rows;
    bool aborted = false;
    std::string error;
};

/// Consecutive failed solves tolerated before a run is aborted.
inline constexpr int kMaxConsecutiveFailures = 10;

/// Runs the scenario for round(duration / Ts) sampling intervals. The trace
/// row at t = k Ts holds the state at t, the input applied on [t, t + Ts) and
/// the output g(x, u). Divergence or persistent solver failure ends the run
/// early with `aborted` set and the partial trace kept.
Trace run_closed_loop(const PlantModel& plant, const MpcConfig& cfg, const Scenario& scenario);

}  // namespace slmpc
