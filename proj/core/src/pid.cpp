#include "slmpc/pid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slmpc {

std::string_view to_string(PidAction a) { return a == PidAction::Direct ? "direct" : "reverse"; }

std::optional<PidAction> parse_pid_action(std::string_view name)
{
    if (name == "direct") {
        return PidAction::Direct;
    }
    if (name == "reverse") {
        return PidAction::Reverse;
    }
    return std::nullopt;
}

void PidParams::validate() const
{
    if (!(integral_time > 0.0) || !std::isfinite(integral_time)) {
        throw std::invalid_argument("PI integral time must be positive and finite");
    }
    if (!(out_min <= out_max)) {
        throw std::invalid_argument("PI output bounds are not ordered");
    }
    if (!std::isfinite(gain) || !std::isfinite(bias)) {
        throw std::invalid_argument("PI gain and bias must be finite");
    }
}

PidStep step_pid(const PidParams& p, double measurement, double setpoint, double accumulator,
                 double dt)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step_pid: dt must be positive");
    }
    const double sign = p.action == PidAction::Reverse ? 1.0 : -1.0;
    const double err = setpoint - measurement;
    auto law = [&](double acc) { return p.bias + sign * p.gain * (err + acc / p.integral_time); };

    const double candidate_acc = accumulator + err * dt;
    const double candidate = law(candidate_acc);
    const double push = sign * p.gain * err;  // direction the error drives the output
    const bool windup = (candidate > p.out_max && push > 0.0) || (candidate < p.out_min && push < 0.0);
    const double acc = windup ? accumulator : candidate_acc;
    return {std::clamp(law(acc), p.out_min, p.out_max), acc};
}

}  // namespace slmpc
