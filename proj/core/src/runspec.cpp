#include "slmpc/runspec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "slmpc/errors.hpp"
#include "slmpc/plants.hpp"

namespace slmpc {

std::string format_number(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

struct Entry {
    std::string value;
    std::size_t line = 0;
};

struct Section {
    std::string name;
    std::size_t line = 0;
    std::map<std::string, Entry> keys;
    std::vector<Entry> setpoints;  // repeated `setpoint` lines in [scenario]
};

std::string_view trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string unquote(std::string_view s)
{
    s = trim(s);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(s);
}

const std::set<std::string>& allowed_keys(const std::string& section)
{
    static const std::set<std::string> plant{"name", "x0", "u0"};
    static const std::set<std::string> mpc{"horizon", "ts",     "w_y",   "w_du",   "du_min",
                                           "du_max",  "u_min",  "u_max", "y_min",  "y_max",
                                           "solver",  "tol",    "max_iter", "reduce"};
    static const std::set<std::string> pid{"measure", "setpoint", "action",  "gain", "integral_time",
                                           "bias",    "out_min",  "out_max", "drives"};
    static const std::set<std::string> scenario{"scheme",    "duration", "relin_period", "substeps",
                                                "noise_std", "seed",     "setpoint"};
    static const std::set<std::string> output{"dir"};
    if (section == "plant") {
        return plant;
    }
    if (section == "mpc") {
        return mpc;
    }
    if (section == "scenario") {
        return scenario;
    }
    if (section == "output") {
        return output;
    }
    return pid;
}

std::vector<Section> tokenize(std::string_view text)
{
    std::vector<Section> sections;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            if (end == text.size()) {
                break;
            }
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ParseError("", line_no, "malformed section header");
            }
            std::string name(trim(line.substr(1, line.size() - 2)));
            const bool known = name == "plant" || name == "mpc" || name == "scenario" ||
                               name == "output" || (name.rfind("pid.", 0) == 0 && name.size() > 4);
            if (!known) {
                throw ParseError(name, line_no, "unknown section");
            }
            if (!seen.insert(name).second) {
                throw ParseError(name, line_no, "duplicate section");
            }
            sections.push_back({name, line_no, {}, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ParseError("", line_no, "expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (sections.empty()) {
            throw ParseError(key, line_no, "key outside of any section");
        }
        Section& sec = sections.back();
        if (!allowed_keys(sec.name).count(key)) {
            throw ParseError(key, line_no, "unknown key in [" + sec.name + "]");
        }
        if (sec.name == "scenario" && key == "setpoint") {
            sec.setpoints.push_back({value, line_no});
            continue;
        }
        if (!sec.keys.emplace(key, Entry{value, line_no}).second) {
            throw ParseError(key, line_no, "duplicate key");
        }
        if (end == text.size()) {
            break;
        }
    }
    return sections;
}

double to_number(std::string_view raw, const std::string& key, std::size_t line)
{
    std::string s = unquote(raw);
    std::string_view v = s;
    if (!v.empty() && v.front() == '+') {
        v.remove_prefix(1);
    }
    if (v == "inf" || v == "infinity") {
        return kUnbounded;
    }
    if (v == "-inf" || v == "-infinity") {
        return -kUnbounded;
    }
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || std::isnan(out) || v.empty()) {
        throw ParseError(key, line, "not a number: '" + s + "'");
    }
    return out;
}

Vector to_list(std::string_view raw, const std::string& key, std::size_t line)
{
    Vector out;
    std::string s = unquote(raw);
    std::string_view rest = s;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(to_number(rest.substr(0, comma), key, line));
        if (comma == std::string_view::npos) {
            break;
        }
        rest = rest.substr(comma + 1);
    }
    return out;
}

std::uint64_t to_unsigned(std::string_view raw, const std::string& key, std::size_t line)
{
    const std::string s = unquote(raw);
    std::uint64_t out = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
        throw ParseError(key, line, "not a non-negative integer: '" + s + "'");
    }
    return out;
}

bool to_bool(std::string_view raw, const std::string& key, std::size_t line)
{
    const std::string s = unquote(raw);
    if (s == "true" || s == "yes" || s == "1") {
        return true;
    }
    if (s == "false" || s == "no" || s == "0") {
        return false;
    }
    throw ParseError(key, line, "not a boolean: '" + s + "'");
}

// "x3" -> 3 with the expected prefix.
std::size_t to_channel(std::string_view raw, char prefix, std::size_t limit, const std::string& key,
                       std::size_t line)
{
    const std::string s = unquote(raw);
    if (s.size() < 2 || s.front() != prefix) {
        throw ParseError(key, line, std::string("expected ") + prefix + "<index>, got '" + s + "'");
    }
    const auto idx = to_unsigned(std::string_view(s).substr(1), key, line);
    if (idx >= limit) {
        throw ParseError(key, line, "channel index " + std::to_string(idx) + " out of range");
    }
    return static_cast<std::size_t>(idx);
}

class Reader {
public:
    explicit Reader(const Section* s) : s_(s) {}

    const Entry* find(const std::string& key) const
    {
        if (!s_) {
            return nullptr;
        }
        const auto it = s_->keys.find(key);
        return it == s_->keys.end() ? nullptr : &it->second;
    }
    std::size_t line() const { return s_ ? s_->line : 0; }

    double number(const std::string& key, double fallback) const
    {
        const Entry* e = find(key);
        return e ? to_number(e->value, key, e->line) : fallback;
    }
    Vector list(const std::string& key, std::size_t n, const Vector& fallback) const
    {
        const Entry* e = find(key);
        if (!e) {
            return fallback;
        }
        Vector v = to_list(e->value, key, e->line);
        if (v.size() != n) {
            throw ParseError(key, e->line,
                             "expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
        }
        return v;
    }
    std::string text(const std::string& key, const std::string& fallback) const
    {
        const Entry* e = find(key);
        return e ? unquote(e->value) : fallback;
    }
    std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) const
    {
        const Entry* e = find(key);
        return e ? to_unsigned(e->value, key, e->line) : fallback;
    }
    bool boolean(const std::string& key, bool fallback) const
    {
        const Entry* e = find(key);
        return e ? to_bool(e->value, key, e->line) : fallback;
    }
    std::size_t key_line(const std::string& key) const
    {
        const Entry* e = find(key);
        return e ? e->line : line();
    }

private:
    const Section* s_;
};

void require_order(const Reader& r, const std::string& lo_key, const Vector& lo, const Vector& hi)
{
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] <= hi[i])) {
            throw ParseError(lo_key, r.key_line(lo_key),
                             "lower bound exceeds upper bound at index " + std::to_string(i));
        }
    }
}

void require(bool ok, const Reader& r, const std::string& key, const std::string& msg)
{
    if (!ok) {
        throw ParseError(key, r.key_line(key), msg);
    }
}

}  // namespace

RunSpec parse_runspec_text(std::string_view text)
{
    const std::vector<Section> sections = tokenize(text);
    auto section = [&](const std::string& name) -> const Section* {
        const auto it = std::find_if(sections.begin(), sections.end(),
                                     [&](const Section& s) { return s.name == name; });
        return it == sections.end() ? nullptr : &*it;
    };

    RunSpec spec;

    // [plant]
    const Reader plant(section("plant"));
    const Entry* name = plant.find("name");
    if (!name) {
        throw ParseError("name", plant.line(), "missing required key in [plant]");
    }
    spec.plant = unquote(name->value);
    if (!plants::is_registered(spec.plant)) {
        throw ParseError("name", name->line, "unknown plant '" + spec.plant + "'");
    }
    const PlantEntry entry = plants::make(spec.plant);
    const std::size_t nx = entry.model.n_x;
    const std::size_t nu = entry.model.n_u;
    const std::size_t ny = entry.model.n_y;
    Scenario& sc = spec.scenario;
    sc.x0 = plant.list("x0", nx, entry.x_nominal);
    sc.u0 = plant.list("u0", nu, entry.u_nominal);

    // [mpc]
    const Reader mpc(section("mpc"));
    const Entry* horizon = mpc.find("horizon");
    if (!horizon) {
        throw ParseError("horizon", mpc.line(), "missing required key in [mpc]");
    }
    MpcConfig& cfg = spec.mpc;
    cfg = MpcConfig::with_dims(nu, ny);
    cfg.horizon = static_cast<std::size_t>(to_unsigned(horizon->value, "horizon", horizon->line));
    require(cfg.horizon >= 1, mpc, "horizon", "horizon must be at least 1");
    cfg.Ts = mpc.number("ts", kDefaultTs);
    require(cfg.Ts > 0.0 && std::isfinite(cfg.Ts), mpc, "ts", "sampling time must be positive");
    const Vector w_y = mpc.list("w_y", ny, Vector(ny, 100.0));
    const Vector w_du = mpc.list("w_du", nu, Vector(nu, 1.0));
    for (std::size_t i = 0; i < ny; ++i) {
        require(w_y[i] >= 0.0 && std::isfinite(w_y[i]), mpc, "w_y", "output weights must be >= 0");
        cfg.W_y(i, i) = w_y[i];
    }
    for (std::size_t k = 0; k < nu; ++k) {
        require(w_du[k] > 0.0 && std::isfinite(w_du[k]), mpc, "w_du", "increment weights must be > 0");
        cfg.W_du(k, k) = w_du[k];
    }
    cfg.du_min = mpc.list("du_min", nu, cfg.du_min);
    cfg.du_max = mpc.list("du_max", nu, cfg.du_max);
    cfg.u_min = mpc.list("u_min", nu, cfg.u_min);
    cfg.u_max = mpc.list("u_max", nu, cfg.u_max);
    cfg.y_min = mpc.list("y_min", ny, cfg.y_min);
    cfg.y_max = mpc.list("y_max", ny, cfg.y_max);
    require_order(mpc, "du_min", cfg.du_min, cfg.du_max);
    require_order(mpc, "u_min", cfg.u_min, cfg.u_max);
    require_order(mpc, "y_min", cfg.y_min, cfg.y_max);

    ControllerSettings& ctl = sc.controller;
    const std::string solver = mpc.text("solver", std::string(to_string(ctl.solver)));
    const auto kind = parse_solver_kind(solver);
    require(kind.has_value(), mpc, "solver", "unknown solver '" + solver + "'");
    ctl.solver = *kind;
    ctl.cdal_tol = mpc.number("tol", ctl.cdal_tol);
    require(ctl.cdal_tol > 0.0 && std::isfinite(ctl.cdal_tol), mpc, "tol", "tol must be positive");
    const auto max_iter = mpc.unsigned_int("max_iter", static_cast<std::uint64_t>(ctl.max_iter));
    require(max_iter >= 1 && max_iter <= 1000000, mpc, "max_iter", "max_iter out of range");
    ctl.max_iter = static_cast<int>(max_iter);
    ctl.reduce = mpc.boolean("reduce", ctl.reduce);

    // [scenario]
    const Section* scen_sec = section("scenario");
    const Reader scen(scen_sec);
    const std::string scheme = scen.text("scheme", std::string(to_string(sc.scheme)));
    const auto sch = parse_scheme(scheme);
    require(sch.has_value(), scen, "scheme", "unknown scheme '" + scheme + "'");
    sc.scheme = *sch;
    sc.duration = scen.number("duration", kDefaultDuration);
    require(sc.duration > 0.0 && std::isfinite(sc.duration), scen, "duration",
            "duration must be positive");
    sc.relin_period = static_cast<std::size_t>(scen.unsigned_int("relin_period", sc.relin_period));
    const auto substeps = scen.unsigned_int("substeps", static_cast<std::uint64_t>(sc.substeps));
    require(substeps >= 1 && substeps <= 100000, scen, "substeps", "substeps out of range");
    sc.substeps = static_cast<int>(substeps);
    sc.noise_std = scen.number("noise_std", 0.0);
    require(sc.noise_std >= 0.0 && std::isfinite(sc.noise_std), scen, "noise_std",
            "noise_std must be >= 0");
    sc.seed = scen.unsigned_int("seed", 0);

    if (scen_sec) {
        for (const Entry& e : scen_sec->setpoints) {
            const auto colon = e.value.find(':');
            if (colon == std::string::npos) {
                throw ParseError("setpoint", e.line, "expected '<time>: <values>'");
            }
            SetpointStep step;
            step.time = to_number(std::string_view(e.value).substr(0, colon), "setpoint", e.line);
            step.value = to_list(std::string_view(e.value).substr(colon + 1), "setpoint", e.line);
            if (step.value.size() != ny) {
                throw ParseError("setpoint", e.line,
                                 "expected " + std::to_string(ny) + " values, got " +
                                     std::to_string(step.value.size()));
            }
            if (!sc.schedule.empty() && !(step.time > sc.schedule.back().time)) {
                throw ParseError("setpoint", e.line, "setpoint times must be strictly increasing");
            }
            if (step.time < 0.0 || step.time > sc.duration) {
                throw ParseError("setpoint", e.line, "setpoint time outside [0, duration]");
            }
            sc.schedule.push_back(std::move(step));
        }
    }
    if (sc.schedule.empty()) {
        sc.schedule.push_back({0.0, entry.model.eval_output(sc.x0, sc.u0)});
    }
    cfg.r = sc.schedule.front().value;

    // [pid.<name>] in file order
    for (const Section& s : sections) {
        if (s.name.rfind("pid.", 0) != 0) {
            continue;
        }
        const Reader r(&s);
        PidLoop loop;
        loop.name = s.name.substr(4);
        const Entry* measure = r.find("measure");
        if (!measure) {
            throw ParseError("measure", s.line, "missing required key in [" + s.name + "]");
        }
        const std::string m = unquote(measure->value);
        if (!m.empty() && m.front() == 'x') {
            loop.measured_kind = SignalKind::State;
            loop.measured_index = to_channel(m, 'x', nx, "measure", measure->line);
        } else {
            loop.measured_kind = SignalKind::Output;
            loop.measured_index = to_channel(m, 'y', ny, "measure", measure->line);
        }
        if (const Entry* sp = r.find("setpoint")) {
            const std::string v = unquote(sp->value);
            if (v.rfind("pid.", 0) == 0) {
                loop.setpoint_kind = PidLoop::SetpointKind::Cascade;
                loop.cascade_from = v.substr(4);
            } else if (!v.empty() && v.front() == 'r') {
                loop.setpoint_kind = PidLoop::SetpointKind::Reference;
                loop.setpoint_index = to_channel(v, 'r', ny, "setpoint", sp->line);
            } else {
                loop.setpoint_kind = PidLoop::SetpointKind::Constant;
                loop.setpoint_value = to_number(v, "setpoint", sp->line);
            }
        }
        const std::string action = r.text("action", "reverse");
        const auto act = parse_pid_action(action);
        require(act.has_value(), r, "action", "action must be 'direct' or 'reverse'");
        loop.params.action = *act;
        loop.params.gain = r.number("gain", 1.0);
        loop.params.integral_time = r.number("integral_time", 1.0);
        loop.params.bias = r.number("bias", 0.0);
        loop.params.out_min = r.number("out_min", -kUnbounded);
        loop.params.out_max = r.number("out_max", kUnbounded);
        require(loop.params.integral_time > 0.0 && std::isfinite(loop.params.integral_time), r,
                "integral_time", "integral_time must be positive");
        require(std::isfinite(loop.params.gain), r, "gain", "gain must be finite");
        require(std::isfinite(loop.params.bias), r, "bias", "bias must be finite");
        require(loop.params.out_min <= loop.params.out_max, r, "out_min",
                "out_min exceeds out_max");
        if (const Entry* d = r.find("drives")) {
            if (unquote(d->value) != "none") {
                loop.drives_input = to_channel(d->value, 'u', nu, "drives", d->line);
            }
        }
        sc.pid.push_back(std::move(loop));
    }

    // [output]
    const Reader out(section("output"));
    spec.output_dir = out.text("dir", spec.output_dir);

    try {
        sc.validate(entry.model, cfg);
    } catch (const std::invalid_argument& e) {
        throw ParseError("", 0, e.what());
    } catch (const AssemblyError& e) {
        throw ParseError("", 0, e.what());
    }
    return spec;
}

RunSpec parse_runspec(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open run spec '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_runspec_text(ss.str());
}

namespace {

std::string join(const Vector& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) {
            s += ", ";
        }
        s += format_number(v[i]);
    }
    return s;
}

Vector diagonal_of(const Matrix& m)
{
    Vector d(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        d[i] = m(i, i);
    }
    return d;
}

}  // namespace

std::string emit_runspec(const RunSpec& spec)
{
    const MpcConfig& cfg = spec.mpc;
    const Scenario& sc = spec.scenario;
    std::ostringstream o;
    o << "[plant]\n"
      << "name = " << spec.plant << "\n"
      << "x0 = " << join(sc.x0) << "\n"
      << "u0 = " << join(sc.u0) << "\n\n";

    o << "[mpc]\n"
      << "horizon = " << cfg.horizon << "\n"
      << "ts = " << format_number(cfg.Ts) << "\n"
      << "w_y = " << join(diagonal_of(cfg.W_y)) << "\n"
      << "w_du = " << join(diagonal_of(cfg.W_du)) << "\n"
      << "du_min = " << join(cfg.du_min) << "\n"
      << "du_max = " << join(cfg.du_max) << "\n"
      << "u_min = " << join(cfg.u_min) << "\n"
      << "u_max = " << join(cfg.u_max) << "\n"
      << "y_min = " << join(cfg.y_min) << "\n"
      << "y_max = " << join(cfg.y_max) << "\n"
      << "solver = " << to_string(sc.controller.solver) << "\n"
      << "tol = " << format_number(sc.controller.cdal_tol) << "\n"
      << "max_iter = " << sc.controller.max_iter << "\n"
      << "reduce = " << (sc.controller.reduce ? "true" : "false") << "\n\n";

    for (const PidLoop& l : sc.pid) {
        o << "[pid." << l.name << "]\n"
          << "measure = " << (l.measured_kind == SignalKind::State ? 'x' : 'y') << l.measured_index
          << "\n";
        switch (l.setpoint_kind) {
        case PidLoop::SetpointKind::Constant:
            o << "setpoint = " << format_number(l.setpoint_value) << "\n";
            break;
        case PidLoop::SetpointKind::Reference:
            o << "setpoint = r" << l.setpoint_index << "\n";
            break;
        case PidLoop::SetpointKind::Cascade:
            o << "setpoint = pid." << l.cascade_from << "\n";
            break;
        }
        o << "action = " << to_string(l.params.action) << "\n"
          << "gain = " << format_number(l.params.gain) << "\n"
          << "integral_time = " << format_number(l.params.integral_time) << "\n"
          << "bias = " << format_number(l.params.bias) << "\n"
          << "out_min = " << format_number(l.params.out_min) << "\n"
          << "out_max = " << format_number(l.params.out_max) << "\n"
          << "drives = " << (l.drives_input ? "u" + std::to_string(*l.drives_input) : "none")
          << "\n\n";
    }

    o << "[scenario]\n"
      << "scheme = " << to_string(sc.scheme) << "\n"
      << "duration = " << format_number(sc.duration) << "\n"
      << "relin_period = " << sc.relin_period << "\n"
      << "substeps = " << sc.substeps << "\n"
      << "noise_std = " << format_number(sc.noise_std) << "\n"
      << "seed = " << sc.seed << "\n";
    for (const SetpointStep& s : sc.schedule) {
        o << "setpoint = " << format_number(s.time) << ": " << join(s.value) << "\n";
    }
    o << "\n[output]\n"
      << "dir = \"" << spec.output_dir << "\"\n";
    return o.str();
}

}  // namespace slmpc
