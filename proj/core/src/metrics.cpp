#include "slmpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace slmpc {

Metrics compute_metrics(const Trace& trace, const std::vector<SetpointStep>& schedule,
                        std::span<const double> y_min, std::span<const double> y_max)
{
    const auto& rows = trace.rows;
    if (rows.empty()) {
        throw std::invalid_argument("compute_metrics: empty trace");
    }
    const std::size_t ny = rows.front().y.size();
    if ((!y_min.empty() && y_min.size() != ny) || (!y_max.empty() && y_max.size() != ny)) {
        throw std::invalid_argument("compute_metrics: bound vectors have the wrong length");
    }
    const std::size_t n = rows.size();
    auto spacing = [&](std::size_t k) {
        if (k + 1 < n) {
            return rows[k + 1].time - rows[k].time;
        }
        return n > 1 ? rows[k].time - rows[k - 1].time : 0.0;
    };

    Metrics m;
    m.channels.resize(ny);
    for (std::size_t c = 0; c < ny; ++c) {
        ChannelMetrics& ch = m.channels[c];
        for (std::size_t k = 0; k < n; ++k) {
            const double e = rows[k].y[c] - rows[k].r[c];
            ch.ise += e * e * spacing(k);
            double v = 0.0;
            if (!y_max.empty() && rows[k].y[c] > y_max[c]) {
                v = rows[k].y[c] - y_max[c];
            }
            if (!y_min.empty() && rows[k].y[c] < y_min[c]) {
                v = y_min[c] - rows[k].y[c];
            }
            if (v > 0.0) {
                ++ch.violations;
                ch.max_violation = std::max(ch.max_violation, v);
            }
        }

        for (std::size_t s = 0; s < schedule.size(); ++s) {
            const double begin = schedule[s].time;
            const double end = s + 1 < schedule.size() ? schedule[s + 1].time
                                                       : std::numeric_limits<double>::infinity();
            auto first = std::find_if(rows.begin(), rows.end(),
                                      [&](const TraceRow& r) { return r.time >= begin; });
            auto last = std::find_if(first, rows.end(), [&](const TraceRow& r) { return r.time >= end; });
            SegmentMetrics seg;
            seg.start = begin;
            if (first == last) {
                ch.segments.push_back(seg);
                continue;
            }
            const double target = schedule[s].value[c];
            const double from = s == 0 ? first->y[c] : schedule[s - 1].value[c];
            const double step = target - from;
            const double dir = step > 0.0 ? 1.0 : (step < 0.0 ? -1.0 : 0.0);
            const double band = step != 0.0 ? kSettlingBand * std::abs(step)
                                            : kSettlingBand * std::abs(target);

            std::optional<std::size_t> last_out;
            for (auto it = first; it != last; ++it) {
                const double err = it->y[c] - target;
                if (dir != 0.0) {
                    seg.overshoot = std::max(seg.overshoot, dir * err);
                }
                if (std::abs(err) > band) {
                    last_out = static_cast<std::size_t>(it - rows.begin());
                }
            }
            const auto end_idx = static_cast<std::size_t>(last - rows.begin());
            if (!last_out) {
                seg.settling_time = first->time - begin;
            } else if (*last_out + 1 >= end_idx) {
                seg.settling_time = std::numeric_limits<double>::infinity();
            } else {
                seg.settling_time = rows[*last_out + 1].time - begin;
            }
            ch.segments.push_back(seg);
        }

        m.ise += ch.ise;
        m.violations += ch.violations;
        m.max_violation = std::max(m.max_violation, ch.max_violation);
        for (const auto& seg : ch.segments) {
            m.max_overshoot = std::max(m.max_overshoot, seg.overshoot);
            m.max_settling_time = std::max(m.max_settling_time, seg.settling_time);
        }
    }
    return m;
}

}  // namespace slmpc
