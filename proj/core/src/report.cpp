#include "slmpc/report.hpp"

#include <cstdio>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "slmpc/plants.hpp"

namespace slmpc {

namespace {

std::string g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_cell(const std::string& s)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::runtime_error("malformed number '" + s + "' in trace");
    }
    if (used != s.size()) {
        throw std::runtime_error("malformed number '" + s + "' in trace");
    }
    return v;
}

// Counts columns named <prefix><0..> starting at `pos`.
std::size_t count_run(const std::vector<std::string>& cols, std::size_t& pos, char prefix)
{
    std::size_t n = 0;
    while (pos < cols.size() && cols[pos] == std::string(1, prefix) + std::to_string(n)) {
        ++n;
        ++pos;
    }
    return n;
}

std::string trace_name(Scheme s) { return "trace_" + std::string(to_string(s)) + ".csv"; }

bool write_file(const std::filesystem::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    return static_cast<bool>(out);
}

}  // namespace

std::string trace_csv_header(std::size_t n_x, std::size_t n_y, std::size_t n_u)
{
    std::string h = "time";
    auto add = [&](char p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h += ',';
            h += p;
            h += std::to_string(i);
        }
    };
    add('x', n_x);
    add('y', n_y);
    add('u', n_u);
    add('r', n_y);
    h += ",status,iters,solve_ms";
    return h;
}

void write_trace_csv(std::ostream& out, const Trace& trace, bool timing)
{
    out << trace_csv_header(trace.n_x, trace.n_y, trace.n_u) << '\n';
    for (const TraceRow& row : trace.rows) {
        out << g17(row.time);
        for (const Vector* v : {&row.x, &row.y, &row.u, &row.r}) {
            for (double e : *v) {
                out << ',' << g17(e);
            }
        }
        out << ',' << row.status << ',' << row.iterations << ','
            << g17(timing ? row.solve_time * 1e3 : 0.0) << '\n';
    }
}

Trace read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("empty trace file");
    }
    const auto cols = split(line);
    std::size_t pos = 1;
    if (cols.empty() || cols[0] != "time") {
        throw std::runtime_error("trace header must start with 'time'");
    }
    Trace t;
    t.n_x = count_run(cols, pos, 'x');
    t.n_y = count_run(cols, pos, 'y');
    t.n_u = count_run(cols, pos, 'u');
    const std::size_t n_r = count_run(cols, pos, 'r');
    if (n_r != t.n_y || cols.size() != pos + 3 || cols[pos] != "status" || cols[pos + 1] != "iters" ||
        cols[pos + 2] != "solve_ms") {
        throw std::runtime_error("unexpected trace header '" + line + "'");
    }
    const std::size_t width = cols.size();
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != width) {
            throw std::runtime_error("trace row has " + std::to_string(cells.size()) + " columns, expected " +
                                     std::to_string(width));
        }
        TraceRow row;
        std::size_t c = 0;
        row.time = parse_cell(cells[c++]);
        auto take = [&](Vector& v, std::size_t n) {
            v.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                v[i] = parse_cell(cells[c++]);
            }
        };
        take(row.x, t.n_x);
        take(row.y, t.n_y);
        take(row.u, t.n_u);
        take(row.r, t.n_y);
        row.status = cells[c++];
        row.iterations = static_cast<int>(parse_cell(cells[c++]));
        row.solve_time = parse_cell(cells[c++]) * 1e-3;
        t.rows.push_back(std::move(row));
    }
    return t;
}

void write_summary_csv(std::ostream& out, const std::vector<SchemeResult>& results)
{
    const std::size_t n_y = results.empty() ? 0 : results.front().trace.n_y;
    out << "scheme,status,samples,ise";
    for (std::size_t i = 0; i < n_y; ++i) {
        out << ",ise_y" << i;
    }
    out << ",max_overshoot,max_settling_time,violations,max_violation\n";
    for (const SchemeResult& r : results) {
        const Metrics& m = r.metrics;
        out << to_string(r.trace.scheme) << ',' << (r.trace.aborted ? "aborted" : "ok") << ','
            << r.trace.rows.size() << ',' << g17(m.ise);
        for (std::size_t i = 0; i < n_y; ++i) {
            out << ',' << g17(i < m.channels.size() ? m.channels[i].ise : 0.0);
        }
        out << ',' << g17(m.max_overshoot) << ',' << g17(m.max_settling_time) << ',' << m.violations
            << ',' << g17(m.max_violation) << '\n';
    }
}

std::string plot_script(const std::vector<Scheme>& schemes, std::size_t n_x, std::size_t n_y,
                        std::size_t n_u)
{
    std::ostringstream o;
    o << "# gnuplot -p plot.gp\n"
      << "set datafile separator ','\n"
      << "set multiplot layout " << (n_y + n_u) << ",1\n";
    // ref_col == 0: no setpoint curve.
    auto panel = [&](const std::string& label, std::size_t col, std::size_t ref_col) {
        std::vector<std::string> items;
        for (Scheme s : schemes) {
            items.push_back("'" + trace_name(s) + "' using 1:" + std::to_string(col) +
                            " with lines title '" + std::string(to_string(s)) + "'");
        }
        if (ref_col != 0) {
            items.push_back("'" + trace_name(schemes.front()) + "' using 1:" + std::to_string(ref_col) +
                            " with lines dashtype 2 title 'setpoint'");
        }
        o << "set ylabel '" << label << "'\nplot ";
        for (std::size_t i = 0; i < items.size(); ++i) {
            o << (i ? ", \\\n     " : "") << items[i];
        }
        o << "\n";
    };
    // 1-based columns: time, x.., y.., u.., r..
    for (std::size_t i = 0; i < n_y; ++i) {
        panel("y" + std::to_string(i), 2 + n_x + i, 2 + n_x + n_y + n_u + i);
    }
    for (std::size_t k = 0; k < n_u; ++k) {
        panel("u" + std::to_string(k), 2 + n_x + n_y + k, 0);
    }
    o << "unset multiplot\n";
    return o.str();
}

int run_compare(const RunSpec& spec, const std::vector<Scheme>& schemes, const CompareOptions& options,
                std::ostream& err, std::vector<SchemeResult>* results_out)
{
    const std::filesystem::path dir = spec.output_dir;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) {
        err << "error: output directory '" << dir.string() << "' does not exist\n";
        return kExitIo;
    }
    if (schemes.empty()) {
        err << "error: no schemes requested\n";
        return kExitParse;
    }

    PlantEntry plant;
    try {
        plant = plants::make(spec.plant);
    } catch (const std::out_of_range&) {
        err << "error: unknown plant '" << spec.plant << "'\n";
        return kExitParse;
    }

    std::vector<Scenario> scenarios;
    for (Scheme s : schemes) {
        Scenario sc = spec.scenario;
        sc.scheme = s;
        try {
            sc.validate(plant.model, spec.mpc);
        } catch (const std::exception& e) {
            err << "error: " << to_string(s) << ": " << e.what() << '\n';
            return kExitParse;
        }
        scenarios.push_back(std::move(sc));
    }

    auto run_one = [&](const Scenario& sc) {
        SchemeResult r;
        try {
            r.trace = run_closed_loop(plant.model, spec.mpc, sc);
        } catch (const std::exception& e) {
            r.trace.scheme = sc.scheme;
            r.trace.n_x = plant.model.n_x;
            r.trace.n_u = plant.model.n_u;
            r.trace.n_y = plant.model.n_y;
            r.trace.aborted = true;
            r.trace.error = e.what();
        }
        r.metrics = compute_metrics(r.trace, sc.schedule, spec.mpc.y_min, spec.mpc.y_max);
        std::ostringstream csv;
        write_trace_csv(csv, r.trace, options.timing);
        const bool ok = write_file(dir / trace_name(sc.scheme), csv.str());
        return std::make_pair(std::move(r), ok);
    };

    std::vector<std::pair<SchemeResult, bool>> runs;
    if (options.parallel && scenarios.size() > 1) {
        std::vector<std::future<std::pair<SchemeResult, bool>>> jobs;
        for (const Scenario& sc : scenarios) {
            jobs.push_back(std::async(std::launch::async, run_one, std::cref(sc)));
        }
        for (auto& j : jobs) {
            runs.push_back(j.get());
        }
    } else {
        for (const Scenario& sc : scenarios) {
            runs.push_back(run_one(sc));
        }
    }

    int code = kExitOk;
    std::vector<SchemeResult> results;
    for (auto& [r, ok] : runs) {
        if (!ok) {
            err << "error: could not write " << trace_name(r.trace.scheme) << '\n';
            code = kExitIo;
        }
        if (r.trace.aborted) {
            err << "error: " << to_string(r.trace.scheme) << " aborted at t = "
                << (r.trace.rows.empty() ? 0.0 : r.trace.rows.back().time) << ": " << r.trace.error << '\n';
            if (code == kExitOk) {
                code = kExitAbort;
            }
        }
        results.push_back(std::move(r));
    }

    std::ostringstream summary;
    write_summary_csv(summary, results);
    bool ok = write_file(dir / "summary.csv", summary.str());
    ok = write_file(dir / "runspec.ini", emit_runspec(spec)) && ok;
    if (options.plot) {
        ok = write_file(dir / "plot.gp", plot_script(schemes, plant.model.n_x, plant.model.n_y,
                                                     plant.model.n_u)) &&
             ok;
    }
    if (!ok) {
        err << "error: could not write to '" << dir.string() << "'\n";
        code = kExitIo;
    }
    if (results_out) {
        *results_out = std::move(results);
    }
    return code;
}

}  // namespace slmpc
