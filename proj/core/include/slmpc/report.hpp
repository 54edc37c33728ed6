#pragma once

// Trace and summary CSV files, plot scripts, and the multi-scheme comparison
// driver used by the command-line tool.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "slmpc/metrics.hpp"
#include "slmpc/runspec.hpp"
#include "slmpc/sim.hpp"

namespace slmpc {

/// Exit codes of run_compare and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitParse = 1;
inline constexpr int kExitAbort = 2;
inline constexpr int kExitIo = 3;

/// Header `time,x0..,y0..,u0..,r0..,status,iters,solve_ms`; every run of the
/// same plant shares it, whatever the scheme.
std::string trace_csv_header(std::size_t n_x, std::size_t n_y, std::size_t n_u);

/// Numbers at 17 significant digits. solve_ms is written as 0 unless timing
/// is requested, so untimed files are reproducible byte for byte.
void write_trace_csv(std::ostream& out, const Trace& trace, bool timing = false);

/// Reads a file written by write_trace_csv. Throws std::runtime_error on a
/// malformed header or row.
Trace read_trace_csv(std::istream& in);

struct SchemeResult {
    Trace trace;
    Metrics metrics;
};

/// One row per scheme: scheme,status,samples,ise,ise_y0..,max_overshoot,
/// max_settling_time,violations,max_violation.
void write_summary_csv(std::ostream& out, const std::vector<SchemeResult>& results);

/// Gnuplot commands plotting every output and input against time, one curve
/// per scheme, read from trace_<scheme>.csv next to the script.
std::string plot_script(const std::vector<Scheme>& schemes, std::size_t n_x, std::size_t n_y,
                        std::size_t n_u);

struct CompareOptions {
    bool timing = false;
    bool plot = false;
    bool parallel = true;  // one thread per scheme
};

/// Runs every scheme on the spec and writes runspec.ini, trace_<scheme>.csv,
/// summary.csv and optionally plot.gp into spec.output_dir, which must exist.
/// Diagnostics go to `err`. Returns one of the exit codes above.
int run_compare(const RunSpec& spec, const std::vector<Scheme>& schemes,
                const CompareOptions& options, std::ostream& err,
                std::vector<SchemeResult>* results = nullptr);

}  // namespace slmpc
