#pragma once

// PI law used by the multi-loop baseline:
//
//   out = bias + sign * K * (err + acc / Ti),   err = setpoint - measurement,
//
// with sign +1 for reverse action and -1 for direct action. The output is
// clamped; while it sits on a bound the integrator is frozen if the error
// would push further into that bound (conditional integration).

#include <limits>
#include <optional>
#include <string_view>

namespace slmpc {

enum class PidAction { Direct, Reverse };

std::string_view to_string(PidAction a);
std::optional<PidAction> parse_pid_action(std::string_view name);

struct PidParams {
    double gain = 1.0;
    double integral_time = 1.0;
    PidAction action = PidAction::Reverse;
    double out_min = -std::numeric_limits<double>::infinity();
    double out_max = std::numeric_limits<double>::infinity();
    double bias = 0.0;

    /// Throws std::invalid_argument on a non-positive integral time or
    /// unordered bounds.
    void validate() const;

    bool operator==(const PidParams&) const = default;
};

struct PidStep {
    double output;
    double accumulator;
};

PidStep step_pid(const PidParams& p, double measurement, double setpoint, double accumulator,
                 double dt);

}  // namespace slmpc
