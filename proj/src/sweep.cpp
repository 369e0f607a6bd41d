#include "pcopo/sweep.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pcopo/correlations.hpp"
#include "pcopo/langevin.hpp"

namespace pcopo {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

ResultRecord base_record(const ModelParams& p, const std::optional<double>& e_rel,
                         const Config& cfg) {
    ResultRecord r;
    r.params = p;
    r.e_relative = e_rel;
    r.observable = cfg.sweep.observable;
    r.engine = cfg.sweep.engine;
    r.seed = cfg.sim.seed;
    return r;
}

void emit_nan(std::vector<ResultRecord>& out, ResultRecord r,
              const std::vector<std::string>& names) {
    for (const auto& n : names) r.values.emplace_back(n, kNaN);
    out.push_back(std::move(r));
}

// One sweep point: params fully resolved, below-threshold status known.
void evaluate_point(const Config& cfg, const ModelParams& p, const std::optional<double>& e_rel,
                    bool below, std::vector<ResultRecord>& out) {
    const std::string& obs = cfg.sweep.observable;
    ResultRecord proto = base_record(p, e_rel, cfg);
    proto.below_threshold = below;

    if (obs == "threshold") {
        proto.values.emplace_back("threshold", threshold(p));
        proto.below_threshold = true;  // not a function of E
        out.push_back(std::move(proto));
        return;
    }
    if (obs == "intensity") {
        if (!below) return emit_nan(out, std::move(proto), {"intensity"});
        proto.values.emplace_back("intensity", intensity(p));
        out.push_back(std::move(proto));
        return;
    }
    if (obs == "spectrum") {
        const auto omega = linspace(cfg.sweep.omega_min, cfg.sweep.omega_max,
                                    cfg.sweep.omega_points);
        for (double w : omega) {
            ResultRecord r = proto;
            r.values.emplace_back("omega", w);
            r.values.emplace_back("n_omega", below ? spectral_intensity(p, w) : kNaN);
            out.push_back(std::move(r));
        }
        return;
    }
    if (obs == "min_variance") {
        if (!below) return emit_nan(out, std::move(proto), {"min_variance", "theta_star", "phi_star"});
        const MinVarianceResult mv = min_variance(p);
        proto.values.emplace_back("min_variance", mv.value);
        proto.values.emplace_back("theta_star", mv.theta_star);
        proto.values.emplace_back("phi_star", mv.phi_star);
        out.push_back(std::move(proto));
        return;
    }
    if (obs == "twin_beams") {
        if (!below) return emit_nan(out, std::move(proto), {"raw_variance", "shot_noise", "normalized"});
        const TwinBeamReport tb = twin_beams(p);
        proto.values.emplace_back("raw_variance", tb.raw_variance);
        proto.values.emplace_back("shot_noise", tb.shot_noise);
        proto.values.emplace_back("normalized", tb.normalized);
        out.push_back(std::move(proto));
        return;
    }
    if (obs == "duan_map" || obs == "reid_map") {
        const bool duan = obs == "duan_map";
        const auto theta = linspace(0.0, M_PI, cfg.sweep.n_theta);
        const auto phi = linspace(0.0, 2.0 * M_PI, cfg.sweep.n_phi);
        if (!below) {
            for (double th : theta)
                for (double ph : phi) {
                    ResultRecord r = proto;
                    r.values.emplace_back("theta", th);
                    r.values.emplace_back("phi", ph);
                    if (duan) {
                        r.values.emplace_back("duan_sum", kNaN);
                        r.values.emplace_back("duan_bound", kNaN);
                    } else {
                        r.values.emplace_back("reid_product", kNaN);
                        r.values.emplace_back("reid_lambda", kNaN);
                    }
                    r.values.emplace_back("entangled", kNaN);
                    r.values.emplace_back("area", kNaN);
                    out.push_back(std::move(r));
                }
            return;
        }
        const EntanglementMap map = entanglement_map(p, theta, phi);
        const double area = duan ? map.duan_area : map.reid_area;
        for (size_t it = 0; it < theta.size(); ++it)
            for (size_t ip = 0; ip < phi.size(); ++ip) {
                const EntanglementReport& c = map.at(static_cast<int>(it), static_cast<int>(ip));
                ResultRecord r = proto;
                r.values.emplace_back("theta", theta[it]);
                r.values.emplace_back("phi", phi[ip]);
                if (duan) {
                    r.values.emplace_back("duan_sum", c.duan_sum);
                    r.values.emplace_back("duan_bound", c.duan_bound);
                    r.values.emplace_back("entangled", c.entangled_duan ? 1.0 : 0.0);
                } else {
                    r.values.emplace_back("reid_product", c.reid_product);
                    r.values.emplace_back("reid_lambda", c.reid_lambda);
                    r.values.emplace_back("entangled", c.entangled_reid ? 1.0 : 0.0);
                }
                r.values.emplace_back("area", area);
                out.push_back(std::move(r));
            }
        return;
    }
    if (obs == "simulate") {
        const EnsembleStats st = run_ensemble(p, cfg.sim);
        for (size_t i = 0; i < st.k.size(); ++i) {
            ResultRecord r = proto;
            r.values.emplace_back("k", st.k[i]);
            r.values.emplace_back("far_field_pump", st.far_field_pump[i]);
            r.values.emplace_back("far_field_pump_err", st.far_field_pump_err[i]);
            r.values.emplace_back("far_field_signal", st.far_field_signal[i]);
            r.values.emplace_back("far_field_signal_err", st.far_field_signal_err[i]);
            out.push_back(std::move(r));
        }
        return;
    }
    if (obs == "variance_map") {
        const auto theta = linspace(0.0, M_PI, cfg.sweep.n_theta);
        const auto phi = linspace(0.0, 2.0 * M_PI, cfg.sweep.n_phi);
        const bool want_analytic = cfg.sweep.engine != "langevin";
        const bool want_langevin = cfg.sweep.engine != "analytic";
        VarianceMap am, lm;
        if (want_analytic) {
            if (!below) throw numerical_error("analytic variance map requires E below threshold");
            am = analytic_intracavity_map(p, theta, phi);
        }
        if (want_langevin) lm = intracavity_variance_map(p, cfg.sim, theta, phi);
        for (size_t it = 0; it < theta.size(); ++it)
            for (size_t ip = 0; ip < phi.size(); ++ip) {
                ResultRecord r = proto;
                r.values.emplace_back("theta", theta[it]);
                r.values.emplace_back("phi", phi[ip]);
                if (want_analytic)
                    r.values.emplace_back("variance_analytic",
                                          am.at(static_cast<int>(it), static_cast<int>(ip)));
                if (want_langevin) {
                    r.values.emplace_back("variance_langevin",
                                          lm.at(static_cast<int>(it), static_cast<int>(ip)));
                    r.values.emplace_back("stderr",
                                          lm.stderr_[it * phi.size() + ip]);
                }
                out.push_back(std::move(r));
            }
        return;
    }
    throw validation_error("unknown observable '" + obs + "'");
}

}  // namespace

std::vector<ResultRecord> run_sweep(const Config& cfg) {
    cfg.sweep.validate();
    const auto& axes = cfg.sweep.axes;
    std::vector<size_t> idx(axes.size(), 0);
    std::vector<ResultRecord> out;
    while (true) {
        ModelParams p = cfg.params;
        std::optional<double> e_rel = cfg.E_relative;
        for (size_t a = 0; a < axes.size(); ++a) {
            const double v = axes[a].second[idx[a]];
            const std::string& name = axes[a].first;
            if (name == "E") { p.E = v; e_rel.reset(); }
            else if (name == "E_relative") e_rel = v;
            else if (name == "delta0") p.delta0 = v;
            else if (name == "delta1") p.delta1 = v;
            else if (name == "M0") p.M0 = v;
            else if (name == "M1") p.M1 = v;
            else if (name == "kp") p.kp_explicit = v;
        }
        p.validate();
        p.E = e_rel ? threshold(p) * *e_rel : p.E;
        const bool below = below_threshold(p);
        evaluate_point(cfg, p, e_rel, below, out);

        size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++idx[a] < axes[a].second.size()) break;
            idx[a] = 0;
        }
        if (a == axes.size()) break;  // also terminates the axis-free single point
    }
    return out;
}

void records_to_table(const std::vector<ResultRecord>& records, std::vector<std::string>& columns,
                      std::vector<std::vector<double>>& rows) {
    columns.clear();
    rows.clear();
    if (records.empty()) return;
    columns = {"E", "E_relative", "delta0", "delta1", "M0", "M1", "kp", "below_threshold"};
    for (const auto& [name, _] : records.front().values) columns.push_back(name);
    for (const auto& r : records) {
        if (r.values.size() + 8 != columns.size())
            throw std::logic_error("heterogeneous sweep records");
        std::vector<double> row = {r.params.E,
                                   r.e_relative ? *r.e_relative : kNaN,
                                   r.params.delta0,
                                   r.params.delta1,
                                   r.params.M0,
                                   r.params.M1,
                                   r.params.kp(),
                                   r.below_threshold ? 1.0 : 0.0};
        for (size_t i = 0; i < r.values.size(); ++i) {
            if (r.values[i].first != columns[8 + i])
                throw std::logic_error("heterogeneous sweep records");
            row.push_back(r.values[i].second);
        }
        rows.push_back(std::move(row));
    }
}

Metadata sweep_metadata(const Config& cfg, const std::string& command_line) {
    Metadata m;
    m.emplace_back("generator", "pcopo-workbench");
    m.emplace_back("schema_version", "1");
    if (!command_line.empty()) m.emplace_back("command", command_line);
    m.emplace_back("observable", cfg.sweep.observable);
    m.emplace_back("engine", cfg.sweep.engine);
    for (const auto& [name, vals] : cfg.sweep.axes)
        m.emplace_back("axis." + name, std::to_string(vals.size()) + " values");
    m.emplace_back("delta0", format_full(cfg.params.delta0));
    m.emplace_back("delta1", format_full(cfg.params.delta1));
    m.emplace_back("M0", format_full(cfg.params.M0));
    m.emplace_back("M1", format_full(cfg.params.M1));
    if (cfg.E_relative) m.emplace_back("E_relative", format_full(*cfg.E_relative));
    else m.emplace_back("E", format_full(cfg.params.E));
    const bool stochastic =
        cfg.sweep.observable == "simulate" || cfg.sweep.observable == "variance_map";
    if (stochastic) {
        m.emplace_back("seed", std::to_string(cfg.sim.seed));
        m.emplace_back("n_trajectories", std::to_string(cfg.sim.n_trajectories));
        m.emplace_back("grid_points", std::to_string(cfg.sim.grid_points));
        m.emplace_back("dt", format_full(cfg.sim.dt));
        m.emplace_back("t_measure", format_full(cfg.sim.t_measure));
    }
    return m;
}

}  // namespace pcopo
