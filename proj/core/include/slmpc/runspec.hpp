#pragma once

// Run specification files.
//
// Flat key = value text in sections:
//
//   [plant]        name (required), x0, u0
//   [mpc]          horizon (required), ts, w_y, w_du, du_min, du_max, u_min,
//                  u_max, y_min, y_max, solver, tol, max_iter, reduce
//   [pid.<name>]   measure (xN | yN), setpoint (rN | pid.<name> | number),
//                  action, gain, integral_time, bias, out_min, out_max, drives (uN)
//   [scenario]     scheme, duration, relin_period, substeps, noise_std, seed,
//                  setpoint = <time>: <v0>, <v1>, ...   (one line per step)
//   [output]       dir
//
// Arrays are comma separated, `inf` / `-inf` mark missing bounds, `#` starts a
// comment, and values may be quoted. Weights are diagonal.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "slmpc/mpc_config.hpp"
#include "slmpc/sim.hpp"

namespace slmpc {

struct RunSpec {
    std::string plant;
    MpcConfig mpc;
    Scenario scenario;  // also carries solver settings, PI loops and the seed
    std::string output_dir = ".";

    bool operator==(const RunSpec&) const = default;
};

/// Default sampling time and scenario length when the file omits them.
inline constexpr double kDefaultTs = 0.02;
inline constexpr double kDefaultDuration = 1.0;

/// Parses and validates; every omitted field is filled with its default.
/// Throws ParseError naming the offending key and line.
RunSpec parse_runspec_text(std::string_view text);
RunSpec parse_runspec(const std::filesystem::path& path);

/// Canonical text form; parse_runspec_text(emit_runspec(s)) == s.
std::string emit_runspec(const RunSpec& spec);

/// Shortest text that parses back to exactly v, with inf / -inf for infinities.
std::string format_number(double v);

}  // namespace slmpc
