// slmpc: run and compare control schemes from a run-spec file.
//
//   slmpc run <spec> [--out DIR] [--solver NAME] [--seed N] [--relin-period K]
//   slmpc compare <spec> --schemes multi-pid,sl-mpc,lti-mpc [same options]
//
// Exit codes: 0 success, 1 parse error, 2 simulation abort, 3 I/O error.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "slmpc/errors.hpp"
#include "slmpc/report.hpp"
#include "slmpc/runspec.hpp"

namespace {

struct Overrides {
    std::string out;
    std::string solver;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> relin_period;
    bool plot = false;
    bool timing = false;
    bool serial = false;
};

void add_common(CLI::App* cmd, std::string& spec_path, Overrides& o)
{
    cmd->add_option("spec", spec_path, "Run-spec file")->required();
    cmd->add_option("--out", o.out, "Output directory (must exist); overrides [output] dir");
    cmd->add_option("--solver", o.solver, "QP solver: cdal-sparse or activeset-condensed");
    cmd->add_option("--seed", o.seed, "Noise seed");
    cmd->add_option("--relin-period", o.relin_period,
                    "Samples between relinearizations for sl-mpc (0: only at t = 0)");
    cmd->add_flag("--plot", o.plot, "Also write plot.gp for gnuplot");
    cmd->add_flag("--timing", o.timing, "Record solver wall time in solve_ms");
    cmd->add_flag("--serial", o.serial, "Run schemes one after another");
}

int execute(const std::string& spec_path, const Overrides& o, const std::vector<std::string>& names)
{
    slmpc::RunSpec spec;
    try {
        spec = slmpc::parse_runspec(spec_path);
    } catch (const slmpc::ParseError& e) {
        std::cerr << spec_path << ": " << e.what() << '\n';
        return slmpc::kExitParse;
    } catch (const std::runtime_error& e) {
        std::cerr << e.what() << '\n';
        return slmpc::kExitIo;
    }

    if (!o.out.empty()) {
        spec.output_dir = o.out;
    }
    if (!o.solver.empty()) {
        const auto kind = slmpc::parse_solver_kind(o.solver);
        if (!kind) {
            std::cerr << "error: unknown solver '" << o.solver << "'\n";
            return slmpc::kExitParse;
        }
        spec.scenario.controller.solver = *kind;
    }
    if (o.seed) {
        spec.scenario.seed = *o.seed;
    }
    if (o.relin_period) {
        spec.scenario.relin_period = *o.relin_period;
    }

    std::vector<slmpc::Scheme> schemes;
    if (names.empty()) {
        schemes.push_back(spec.scenario.scheme);
    }
    for (const std::string& n : names) {
        const auto s = slmpc::parse_scheme(n);
        if (!s) {
            std::cerr << "error: unknown scheme '" << n << "'\n";
            return slmpc::kExitParse;
        }
        schemes.push_back(*s);
    }

    slmpc::CompareOptions opts;
    opts.plot = o.plot;
    opts.timing = o.timing;
    opts.parallel = !o.serial;
    std::vector<slmpc::SchemeResult> results;
    const int code = slmpc::run_compare(spec, schemes, opts, std::cerr, &results);
    if (!results.empty()) {
        slmpc::write_summary_csv(std::cout, results);
    }
    return code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Successive-linearization MPC simulator"};
    app.require_subcommand(1);

    std::string run_spec;
    Overrides run_opts;
    CLI::App* run = app.add_subcommand("run", "Run the scheme named in the spec");
    add_common(run, run_spec, run_opts);

    std::string cmp_spec;
    Overrides cmp_opts;
    std::vector<std::string> schemes;
    CLI::App* cmp = app.add_subcommand("compare", "Run several schemes on one spec");
    add_common(cmp, cmp_spec, cmp_opts);
    cmp->add_option("--schemes", schemes, "Comma-separated: multi-pid, sl-mpc, lti-mpc")
        ->delimiter(',')
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : slmpc::kExitParse;
    }

    if (*run) {
        return execute(run_spec, run_opts, {});
    }
    return execute(cmp_spec, cmp_opts, schemes);
}
