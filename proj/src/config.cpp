#include "pcopo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pcopo/correlations.hpp"
#include "pcopo/io.hpp"

namespace pcopo {

namespace {

const std::set<std::string> kAxisNames = {"E", "E_relative", "delta0", "delta1",
                                          "M0", "M1", "kp"};
const std::set<std::string> kObservables = {"intensity", "spectrum",  "threshold",
                                            "min_variance", "duan_map", "reid_map",
                                            "twin_beams", "simulate", "variance_map"};
const std::set<std::string> kEngines = {"analytic", "langevin", "both"};

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
    throw validation_error(origin + ":" + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& origin, int line) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(origin, line, "expected a number, got '" + v + "'");
    }
}

long long parse_int(const std::string& v, const std::string& origin, int line) {
    try {
        size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        fail(origin, line, "expected an integer, got '" + v + "'");
    }
}

bool parse_bool(const std::string& v, const std::string& origin, int line) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    fail(origin, line, "expected true/false, got '" + v + "'");
}

// "a,b,c" or "start:step:stop" (stop inclusive up to rounding).
std::vector<double> parse_values(const std::string& v, const std::string& origin, int line) {
    std::vector<double> out;
    if (v.find(':') != std::string::npos) {
        std::stringstream ss(v);
        std::string part;
        std::vector<double> abc;
        while (std::getline(ss, part, ':')) abc.push_back(parse_double(trim(part), origin, line));
        if (abc.size() != 3 || abc[1] == 0.0)
            fail(origin, line, "range must be start:step:stop with nonzero step");
        const int n = static_cast<int>(std::floor((abc[2] - abc[0]) / abc[1] + 1e-9)) + 1;
        if (n < 1) fail(origin, line, "empty range");
        for (int i = 0; i < n; ++i) out.push_back(abc[0] + i * abc[1]);
    } else {
        std::stringstream ss(v);
        std::string part;
        while (std::getline(ss, part, ',')) {
            part = trim(part);
            if (!part.empty()) out.push_back(parse_double(part, origin, line));
        }
    }
    if (out.empty()) fail(origin, line, "empty value list");
    for (double d : out)
        if (!std::isfinite(d)) fail(origin, line, "non-finite value in list");
    return out;
}

}  // namespace

void SweepSpec::validate() const {
    for (const auto& [name, vals] : axes) {
        if (!kAxisNames.count(name))
            throw validation_error("sweep axis '" + name + "' is not a model parameter");
        if (vals.empty()) throw validation_error("sweep axis '" + name + "' has no values");
    }
    if (!kObservables.count(observable))
        throw validation_error("unknown observable '" + observable + "'");
    if (!kEngines.count(engine)) throw validation_error("unknown engine '" + engine + "'");
    const bool stochastic = observable == "simulate" || observable == "variance_map";
    if (engine != "analytic" && !stochastic)
        throw validation_error("engine '" + engine + "' requires a stochastic observable");
    if (observable == "simulate" && engine == "analytic")
        throw validation_error("observable 'simulate' requires the langevin engine");
    if (omega_points < 2 || !(omega_max > omega_min))
        throw validation_error("invalid omega window");
    if (n_theta < 2 || n_phi < 2) throw validation_error("angle grids need at least 2 points");
}

Config config_parse(const std::string& text, const std::string& origin) {
    Config c;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    bool e_set = false;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(origin, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "model" && section != "sim" && section != "sweep")
                fail(origin, lineno, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(origin, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) fail(origin, lineno, "empty key or value");
        if (section == "model") {
            if (key == "E") { c.params.E = parse_double(val, origin, lineno); e_set = true; }
            else if (key == "E_relative") c.E_relative = parse_double(val, origin, lineno);
            else if (key == "delta0") c.params.delta0 = parse_double(val, origin, lineno);
            else if (key == "delta1") c.params.delta1 = parse_double(val, origin, lineno);
            else if (key == "M0") c.params.M0 = parse_double(val, origin, lineno);
            else if (key == "M1") c.params.M1 = parse_double(val, origin, lineno);
            else if (key == "kp") c.params.kp_explicit = parse_double(val, origin, lineno);
            else fail(origin, lineno, "unknown key '" + key + "' in [model]");
        } else if (section == "sim") {
            if (key == "grid_points") c.sim.grid_points = static_cast<int>(parse_int(val, origin, lineno));
            else if (key == "box_length") c.sim.box_length = parse_double(val, origin, lineno);
            else if (key == "dt") c.sim.dt = parse_double(val, origin, lineno);
            else if (key == "t_transient") c.sim.t_transient = parse_double(val, origin, lineno);
            else if (key == "t_measure") c.sim.t_measure = parse_double(val, origin, lineno);
            else if (key == "n_trajectories") c.sim.n_trajectories = static_cast<int>(parse_int(val, origin, lineno));
            else if (key == "noise_strength") c.sim.noise_strength = parse_double(val, origin, lineno);
            else if (key == "signal_noise_q") c.sim.signal_noise_q = parse_double(val, origin, lineno);
            else if (key == "seed") c.sim.seed = static_cast<std::uint64_t>(parse_int(val, origin, lineno));
            else if (key == "sample_stride") c.sim.sample_stride = parse_double(val, origin, lineno);
            else if (key == "noise_enabled") c.sim.noise_enabled = parse_bool(val, origin, lineno);
            else if (key == "scheme") {
                if (val == "split-step-exponential") c.sim.scheme = Scheme::split_step_exponential;
                else if (val == "semi-implicit") c.sim.scheme = Scheme::semi_implicit;
                else fail(origin, lineno, "unknown scheme '" + val + "'");
            } else fail(origin, lineno, "unknown key '" + key + "' in [sim]");
        } else if (section == "sweep") {
            if (key.rfind("axis.", 0) == 0) {
                const std::string name = key.substr(5);
                if (!kAxisNames.count(name))
                    fail(origin, lineno, "sweep axis '" + name + "' is not a model parameter");
                c.sweep.axes.emplace_back(name, parse_values(val, origin, lineno));
            } else if (key == "observable") c.sweep.observable = val;
            else if (key == "engine") c.sweep.engine = val;
            else if (key == "output") c.sweep.output_path = val;
            else if (key == "omega_min") c.sweep.omega_min = parse_double(val, origin, lineno);
            else if (key == "omega_max") c.sweep.omega_max = parse_double(val, origin, lineno);
            else if (key == "omega_points") c.sweep.omega_points = static_cast<int>(parse_int(val, origin, lineno));
            else if (key == "n_theta") c.sweep.n_theta = static_cast<int>(parse_int(val, origin, lineno));
            else if (key == "n_phi") c.sweep.n_phi = static_cast<int>(parse_int(val, origin, lineno));
            else fail(origin, lineno, "unknown key '" + key + "' in [sweep]");
        } else {
            fail(origin, lineno, "key outside of a section");
        }
    }
    if (e_set && c.E_relative)
        throw validation_error(origin + ": E and E_relative are mutually exclusive");
    try {
        c.params.validate();
        if (c.E_relative && !(*c.E_relative > 0.0))
            throw validation_error("E_relative must be positive");
        c.sim.validate(c.params);
        c.sweep.validate();
    } catch (const validation_error& e) {
        throw validation_error(origin + ": " + e.what());
    }
    return c;
}

Config config_load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return config_parse(ss.str(), path);
}

std::string config_serialize(const Config& c) {
    std::ostringstream os;
    os << "[model]\n";
    if (c.E_relative) os << "E_relative = " << format_full(*c.E_relative) << "\n";
    else os << "E = " << format_full(c.params.E) << "\n";
    os << "delta0 = " << format_full(c.params.delta0) << "\n";
    os << "delta1 = " << format_full(c.params.delta1) << "\n";
    os << "M0 = " << format_full(c.params.M0) << "\n";
    os << "M1 = " << format_full(c.params.M1) << "\n";
    if (c.params.kp_explicit) os << "kp = " << format_full(*c.params.kp_explicit) << "\n";
    os << "\n[sim]\n";
    os << "grid_points = " << c.sim.grid_points << "\n";
    os << "box_length = " << format_full(c.sim.box_length) << "\n";
    os << "dt = " << format_full(c.sim.dt) << "\n";
    os << "t_transient = " << format_full(c.sim.t_transient) << "\n";
    os << "t_measure = " << format_full(c.sim.t_measure) << "\n";
    os << "n_trajectories = " << c.sim.n_trajectories << "\n";
    os << "noise_strength = " << format_full(c.sim.noise_strength) << "\n";
    os << "signal_noise_q = " << format_full(c.sim.signal_noise_q) << "\n";
    os << "seed = " << c.sim.seed << "\n";
    os << "sample_stride = " << format_full(c.sim.sample_stride) << "\n";
    os << "noise_enabled = " << (c.sim.noise_enabled ? "true" : "false") << "\n";
    os << "scheme = "
       << (c.sim.scheme == Scheme::split_step_exponential ? "split-step-exponential"
                                                          : "semi-implicit")
       << "\n";
    os << "\n[sweep]\n";
    for (const auto& [name, vals] : c.sweep.axes) {
        os << "axis." << name << " = ";
        for (size_t i = 0; i < vals.size(); ++i)
            os << (i ? "," : "") << format_full(vals[i]);
        os << "\n";
    }
    os << "observable = " << c.sweep.observable << "\n";
    os << "engine = " << c.sweep.engine << "\n";
    if (!c.sweep.output_path.empty()) os << "output = " << c.sweep.output_path << "\n";
    os << "omega_min = " << format_full(c.sweep.omega_min) << "\n";
    os << "omega_max = " << format_full(c.sweep.omega_max) << "\n";
    os << "omega_points = " << c.sweep.omega_points << "\n";
    os << "n_theta = " << c.sweep.n_theta << "\n";
    os << "n_phi = " << c.sweep.n_phi << "\n";
    return os.str();
}

double resolve_E(const ModelParams& p, const std::optional<double>& e_relative) {
    if (!e_relative) return p.E;
    const double thr = threshold(p);
    const double E = *e_relative * thr;
    ModelParams q = p;
    q.E = E;
    if (*e_relative < 1.0 && sigma_den(q) <= 0.0)
        throw numerical_error("resolved E is not below threshold");
    return E;
}

}  // namespace pcopo
