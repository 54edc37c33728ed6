#pragma once

// Tracking metrics over a closed-loop trace.

#include <cstddef>
#include <span>
#include <vector>

#include "slmpc/sim.hpp"

namespace slmpc {

/// Band half-width for settling, as a fraction of the step size.
inline constexpr double kSettlingBand = 0.02;

struct SegmentMetrics {
    double start = 0.0;          // schedule time of the step
    double overshoot = 0.0;      // excess past the new setpoint, in the step direction
    double settling_time = 0.0;  // after start; infinity if never settled
};

struct ChannelMetrics {
    double ise = 0.0;
    std::vector<SegmentMetrics> segments;
    std::size_t violations = 0;  // samples outside [y_min, y_max]
    double max_violation = 0.0;
};

struct Metrics {
    std::vector<ChannelMetrics> channels;
    double ise = 0.0;  // summed over channels
    double max_overshoot = 0.0;
    double max_settling_time = 0.0;
    std::size_t violations = 0;
    double max_violation = 0.0;
};

/// ISE uses the left-rectangle rule with the spacing to the next row (the last
/// row reuses the previous spacing). For each setpoint segment the step runs
/// from the previous setpoint (or the first output of the segment) to the new
/// one; a zero step uses a band of 2% of |setpoint|. Settling time is measured
/// to the first sample after the last one outside the band.
Metrics compute_metrics(const Trace& trace, const std::vector<SetpointStep>& schedule,
                        std::span<const double> y_min = {}, std::span<const double> y_max = {});

}  // namespace slmpc
