// pcopo: command-line front end for the analytic and Langevin engines.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <set>

#include "CLI11.hpp"
#include "pcopo/config.hpp"
#include "pcopo/correlations.hpp"
#include "pcopo/io.hpp"
#include "pcopo/langevin.hpp"
#include "pcopo/model_core.hpp"
#include "pcopo/sweep.hpp"

namespace fs = std::filesystem;
using namespace pcopo;

namespace {

struct ModelOpts {
    ModelParams p;
    std::optional<double> e_rel;
    std::optional<double> kp;

    void attach(CLI::App* cmd) {
        auto* e = cmd->add_option("--E", p.E, "pump amplitude (absolute)");
        auto* er = cmd->add_option("--E-relative", e_rel, "pump as a fraction of the local threshold");
        e->excludes(er);
        cmd->add_option("--delta0", p.delta0, "pump detuning")->capture_default_str();
        cmd->add_option("--delta1", p.delta1, "signal detuning")->capture_default_str();
        cmd->add_option("--M0", p.M0, "pump modulation depth")->capture_default_str();
        cmd->add_option("--M1", p.M1, "signal modulation depth")->capture_default_str();
        cmd->add_option("--kp", kp, "modulation wavenumber (default 2*kc)");
    }
    ModelParams resolved() {
        if (kp) p.kp_explicit = *kp;
        p.validate();
        p.E = resolve_E(p, e_rel);
        return p;
    }
};

struct SimOpts {
    SimConfig c;
    bool no_noise = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--grid-points", c.grid_points)->capture_default_str();
        cmd->add_option("--box-length", c.box_length, "0 = eight modulation periods")->capture_default_str();
        cmd->add_option("--dt", c.dt)->capture_default_str();
        cmd->add_option("--t-transient", c.t_transient)->capture_default_str();
        cmd->add_option("--t-measure", c.t_measure)->capture_default_str();
        cmd->add_option("--trajectories", c.n_trajectories)->capture_default_str();
        cmd->add_option("--noise-strength", c.noise_strength)->capture_default_str();
        cmd->add_option("--seed", c.seed)->capture_default_str();
        cmd->add_option("--sample-stride", c.sample_stride)->capture_default_str();
        cmd->add_flag("--no-noise", no_noise, "deterministic integration");
        cmd->add_option("--scheme", scheme_name, "split-step-exponential | semi-implicit")
            ->check(CLI::IsMember({"split-step-exponential", "semi-implicit"}));
    }
    SimConfig resolved(const ModelParams& p) {
        c.noise_enabled = !no_noise;
        c.scheme = scheme_name == "semi-implicit" ? Scheme::semi_implicit
                                                  : Scheme::split_step_exponential;
        c.validate(p);
        return c;
    }
    std::string scheme_name = "split-step-exponential";
};

void emit(const std::string& path, bool json, const Metadata& meta,
          const std::vector<std::string>& cols, const std::vector<std::vector<double>>& rows) {
    if (json) {
        const std::string doc = to_json(meta, cols, rows);
        if (path.empty()) {
            std::cout << doc << "\n";
        } else {
            std::ofstream f(path);
            if (!f) throw validation_error("cannot open output file '" + path + "'");
            f << doc << "\n";
        }
    } else if (path.empty()) {
        write_csv(std::cout, meta, cols, rows);
    } else {
        write_csv_file(path, meta, cols, rows);
    }
}

Metadata model_metadata(const ModelParams& p, const std::optional<double>& e_rel) {
    Metadata m;
    m.emplace_back("generator", "pcopo-workbench");
    m.emplace_back("schema_version", "1");
    m.emplace_back("E", format_full(p.E));
    if (e_rel) m.emplace_back("E_relative", format_full(*e_rel));
    m.emplace_back("delta0", format_full(p.delta0));
    m.emplace_back("delta1", format_full(p.delta1));
    m.emplace_back("M0", format_full(p.M0));
    m.emplace_back("M1", format_full(p.M1));
    m.emplace_back("kp", format_full(p.kp()));
    return m;
}

std::string join_args(int argc, char** argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

int column_index(const std::vector<std::string>& cols, const std::string& name) {
    for (size_t i = 0; i < cols.size(); ++i)
        if (cols[i] == name) return static_cast<int>(i) + 1;  // gnuplot is 1-based
    return -1;
}

void write_gnuplot_script(const fs::path& path, const std::string& figure,
                          const std::vector<std::pair<std::string, Config>>& outputs,
                          const std::vector<std::vector<std::string>>& columns) {
    std::ofstream g(path);
    g << "# gnuplot script for " << figure << "\n";
    g << "set datafile separator ','\n";
    g << "set key outside\n";
    bool first = true;
    for (size_t i = 0; i < outputs.size(); ++i) {
        const auto& [csv, cfg] = outputs[i];
        const auto& cols = columns[i];
        const std::string& obs = cfg.sweep.observable;
        const std::string title = "M0=" + std::to_string(cfg.params.M0).substr(0, 4) +
                                  " M1=" + std::to_string(cfg.params.M1).substr(0, 4);
        if (obs == "spectrum") {
            g << (first ? "plot " : "replot ") << "'" << csv << "' using "
              << column_index(cols, "omega") << ":" << column_index(cols, "n_omega")
              << " with lines title '" << title << "'\n";
        } else if (obs == "simulate") {
            g << (first ? "plot " : "replot ") << "'" << csv << "' using "
              << column_index(cols, "k") << ":" << column_index(cols, "far_field_signal")
              << " with linespoints title '" << title << "'\n";
        } else if (obs == "min_variance") {
            g << (first ? "plot " : "replot ") << "'" << csv << "' using "
              << column_index(cols, "E_relative") << ":" << column_index(cols, "min_variance")
              << " with lines title '" << title << "'\n";
        } else if (obs == "twin_beams") {
            g << "# " << csv << ": grid of normalized twin-beam variance (columns M1, E, normalized)\n";
            if (first)
                g << "set view map\nsplot '" << csv << "' using " << column_index(cols, "M1")
                  << ":" << column_index(cols, "E") << ":" << column_index(cols, "normalized")
                  << " with points palette title '" << title << "'\n";
        } else {
            // angle maps: theta-phi surface
            g << "# " << csv << " (" << obs << "), map over theta/phi\n";
            if (first) {
                int val = column_index(cols, "variance_analytic");
                if (val < 0) val = column_index(cols, "variance_langevin");
                if (val < 0) val = column_index(cols, "duan_sum");
                if (val < 0) val = column_index(cols, "reid_product");
                g << "set view map\nsplot '" << csv << "' using " << column_index(cols, "theta")
                  << ":" << column_index(cols, "phi") << ":" << val
                  << " with points palette title '" << title << "'\n";
            }
        }
        first = false;
    }
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Photonic-crystal OPO workbench: analytic and stochastic engines"};
    app.require_subcommand(1);
    const std::string cmdline = join_args(argc, argv);

    std::string output;
    bool as_json = false;

    auto add_io = [&](CLI::App* cmd) {
        cmd->add_option("--output", output, "write to file instead of stdout");
        cmd->add_flag("--json", as_json, "emit JSON instead of CSV");
    };

    // steady
    auto* steady = app.add_subcommand("steady", "pump steady-state harmonics and couplings");
    ModelOpts steady_m;
    steady_m.attach(steady);
    steady->callback([&] {
        const ModelParams p = steady_m.resolved();
        const PumpSteadyState ss = pump_steady_state(p);
        const CouplingConstants cc = coupling_constants(p);
        std::printf("A0(0)    = %.17g %+.17gi\n", ss.a0_0.real(), ss.a0_0.imag());
        std::printf("A0(+kp)  = %.17g %+.17gi\n", ss.a0_plus.real(), ss.a0_plus.imag());
        std::printf("A0(-kp)  = %.17g %+.17gi\n", ss.a0_minus.real(), ss.a0_minus.imag());
        std::printf("S        = %.17g %+.17gi\n", cc.S.real(), cc.S.imag());
        std::printf("kappa    = %.17g %+.17gi\n", cc.kappa.real(), cc.kappa.imag());
    });

    // matrix-check
    auto* mcheck = app.add_subcommand("matrix-check", "closed-form vs numeric inversion residuals");
    int draws = 1000;
    std::uint64_t mseed = 12345;
    mcheck->add_option("--draws", draws)->capture_default_str();
    mcheck->add_option("--seed", mseed)->capture_default_str();
    mcheck->callback([&] {
        std::mt19937_64 rng(mseed);
        std::uniform_real_distribution<double> um(0.0, 1.0), uw(-5.0, 5.0);
        double worst_closed = 0.0, worst_numeric = 0.0;
        for (int i = 0; i < draws; ++i) {
            ModelParams p;
            p.M0 = um(rng);
            p.M1 = um(rng);
            p.E = 0.99 * threshold(p) * um(rng);
            const double w = uw(rng);
            const ComplexMatrix L = build_L(p, w);
            worst_closed = std::max(worst_closed, invert_residual(L, invert_L_closed(p, w)));
            worst_numeric = std::max(worst_numeric, invert_residual(L, invert_numeric(L)));
        }
        std::printf("max |L*Linv_closed - I|  = %.3e over %d draws\n", worst_closed, draws);
        std::printf("max |L*Linv_numeric - I| = %.3e over %d draws\n", worst_numeric, draws);
        if (worst_closed > 1e-10)
            throw numerical_error("closed-form inverse residual above 1e-10");
    });

    // spectrum
    auto* spectrum = app.add_subcommand("spectrum", "spectral intensity n(kc, omega)");
    ModelOpts spectrum_m;
    spectrum_m.attach(spectrum);
    double wmin = -4.0, wmax = 4.0;
    int wpts = 801;
    spectrum->add_option("--omega-min", wmin)->capture_default_str();
    spectrum->add_option("--omega-max", wmax)->capture_default_str();
    spectrum->add_option("--omega-points", wpts)->capture_default_str();
    add_io(spectrum);
    spectrum->callback([&] {
        const ModelParams p = spectrum_m.resolved();
        if (!below_threshold(p)) throw validation_error("spectrum requires E below threshold");
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < wpts; ++i) {
            const double w = wmin + (wmax - wmin) * i / (wpts - 1);
            rows.push_back({w, spectral_intensity(p, w), spectral_intensity_closed(p, w)});
        }
        Metadata meta = model_metadata(p, spectrum_m.e_rel);
        meta.emplace_back("command", cmdline);
        emit(output, as_json, meta, {"omega", "n_omega", "n_omega_closed"}, rows);
    });

    // intensity
    auto* inten = app.add_subcommand("intensity", "stationary signal photon number at kc");
    ModelOpts inten_m;
    inten_m.attach(inten);
    inten->callback([&] {
        const ModelParams p = inten_m.resolved();
        if (!below_threshold(p)) throw validation_error("intensity requires E below threshold");
        std::printf("%.6g\n", intensity(p));
    });

    // threshold
    auto* thr = app.add_subcommand("threshold", "lowest pump amplitude with a divergent response");
    ModelOpts thr_m;
    thr_m.attach(thr);
    thr->callback([&] {
        ModelParams p = thr_m.p;
        if (thr_m.kp) p.kp_explicit = *thr_m.kp;
        p.E = 0.0;
        p.validate();
        std::printf("%.6f\n", threshold(p));
    });

    // squeeze
    auto* squeeze = app.add_subcommand("squeeze", "quadrature variance of the +-kc superposition");
    ModelOpts squeeze_m;
    squeeze_m.attach(squeeze);
    std::optional<double> s_theta, s_phi;
    int s_ntheta = 181, s_nphi = 181;
    squeeze->add_option("--theta", s_theta, "evaluate at a fixed local phase");
    squeeze->add_option("--phi", s_phi, "evaluate at a fixed relative phase");
    squeeze->add_option("--n-theta", s_ntheta)->capture_default_str();
    squeeze->add_option("--n-phi", s_nphi)->capture_default_str();
    squeeze->callback([&] {
        const ModelParams p = squeeze_m.resolved();
        if (!below_threshold(p)) throw validation_error("squeeze requires E below threshold");
        if (s_theta && s_phi) {
            const double v = quadrature_variance(p, {*s_theta, *s_phi});
            std::printf("variance = %.12g (vacuum 2)\n", v);
        } else if (s_theta || s_phi) {
            throw validation_error("--theta and --phi must be given together");
        } else {
            const MinVarianceResult mv = min_variance(p, s_ntheta, s_nphi);
            std::printf("min_variance = %.12g at theta = %.12g, phi = %.12g (vacuum 2)\n",
                        mv.value, mv.theta_star, mv.phi_star);
        }
    });

    // duan / reid
    for (const char* which : {"duan", "reid"}) {
        const bool is_duan = std::string(which) == "duan";
        auto* ent = app.add_subcommand(
            which, is_duan ? "Duan inseparability sum" : "Reid EPR conditional-variance product");
        auto m = std::make_shared<ModelOpts>();
        m->attach(ent);
        auto theta = std::make_shared<double>(0.0);
        auto phi = std::make_shared<double>(0.0);
        auto weight = std::make_shared<double>(1.0);
        auto bound = std::make_shared<std::string>("printed");
        auto map = std::make_shared<bool>(false);
        auto ntheta = std::make_shared<int>(91);
        auto nphi = std::make_shared<int>(181);
        ent->add_option("--theta", *theta)->capture_default_str();
        ent->add_option("--phi", *phi)->capture_default_str();
        if (is_duan) {
            ent->add_option("--weight", *weight)->capture_default_str();
            ent->add_option("--bound", *bound, "printed | standard")
                ->check(CLI::IsMember({"printed", "standard"}));
        }
        ent->add_flag("--map", *map, "full theta-phi map as CSV");
        ent->add_option("--n-theta", *ntheta)->capture_default_str();
        ent->add_option("--n-phi", *nphi)->capture_default_str();
        add_io(ent);
        ent->callback([&, m, theta, phi, weight, bound, map, ntheta, nphi, is_duan] {
            const ModelParams p = m->resolved();
            if (!below_threshold(p))
                throw validation_error("entanglement criteria require E below threshold");
            if (*map) {
                std::vector<double> tg(*ntheta), pg(*nphi);
                for (int i = 0; i < *ntheta; ++i) tg[i] = M_PI * i / (*ntheta - 1);
                for (int i = 0; i < *nphi; ++i) pg[i] = 2.0 * M_PI * i / (*nphi - 1);
                const EntanglementMap em = entanglement_map(p, tg, pg);
                std::vector<std::vector<double>> rows;
                for (int it = 0; it < *ntheta; ++it)
                    for (int ip = 0; ip < *nphi; ++ip) {
                        const auto& c = em.at(it, ip);
                        if (is_duan)
                            rows.push_back({tg[it], pg[ip], c.duan_sum, c.duan_bound,
                                            c.entangled_duan ? 1.0 : 0.0});
                        else
                            rows.push_back({tg[it], pg[ip], c.reid_product, c.reid_lambda,
                                            c.entangled_reid ? 1.0 : 0.0});
                    }
                Metadata meta = model_metadata(p, m->e_rel);
                meta.emplace_back("command", cmdline);
                meta.emplace_back(is_duan ? "duan_area" : "reid_area",
                                  format_full(is_duan ? em.duan_area : em.reid_area));
                emit(output, as_json, meta,
                     is_duan
                         ? std::vector<std::string>{"theta", "phi", "duan_sum", "duan_bound", "entangled"}
                         : std::vector<std::string>{"theta", "phi", "reid_product", "reid_lambda", "entangled"},
                     rows);
            } else if (is_duan) {
                const EntanglementReport r = duan_criterion(
                    p, {*theta, *phi}, *weight,
                    *bound == "standard" ? DuanBound::standard : DuanBound::as_printed);
                std::printf("duan_sum = %.12g, bound = %.12g, entangled = %s\n", r.duan_sum,
                            r.duan_bound, r.entangled_duan ? "yes" : "no");
            } else {
                const EntanglementReport r = reid_criterion(p, {*theta, *phi});
                std::printf("reid_product = %.12g, lambda = %.12g, entangled = %s\n",
                            r.reid_product, r.reid_lambda, r.entangled_reid ? "yes" : "no");
            }
        });
    }

    // twin
    auto* twin = app.add_subcommand("twin", "normalized twin-beam intensity-difference variance");
    ModelOpts twin_m;
    twin_m.attach(twin);
    twin->callback([&] {
        const ModelParams p = twin_m.resolved();
        if (!below_threshold(p)) throw validation_error("twin beams require E below threshold");
        const TwinBeamReport tb = twin_beams(p);
        std::printf("raw_variance = %.12g\nshot_noise = %.12g\nnormalized = %.12g\n",
                    tb.raw_variance, tb.shot_noise, tb.normalized);
    });

    // simulate
    auto* sim = app.add_subcommand("simulate", "Langevin ensemble: stationary far fields");
    ModelOpts sim_m;
    SimOpts sim_s;
    sim_m.attach(sim);
    sim_s.attach(sim);
    add_io(sim);
    sim->callback([&] {
        const ModelParams p = sim_m.resolved();
        const SimConfig c = sim_s.resolved(p);
        const EnsembleStats st = run_ensemble(p, c);
        std::vector<std::vector<double>> rows;
        for (size_t i = 0; i < st.k.size(); ++i)
            rows.push_back({st.k[i], st.far_field_pump[i], st.far_field_pump_err[i],
                            st.far_field_signal[i], st.far_field_signal_err[i]});
        Metadata meta = model_metadata(p, sim_m.e_rel);
        meta.emplace_back("command", cmdline);
        meta.emplace_back("seed", std::to_string(c.seed));
        meta.emplace_back("n_trajectories", std::to_string(c.n_trajectories));
        meta.emplace_back("grid_points", std::to_string(c.grid_points));
        meta.emplace_back("dt", format_full(c.dt));
        meta.emplace_back("t_measure", format_full(c.t_measure));
        meta.emplace_back("moment_n_plus", format_full(st.moments.n_plus));
        meta.emplace_back("moment_n_minus", format_full(st.moments.n_minus));
        emit(output, as_json, meta,
             {"k", "far_field_pump", "far_field_pump_err", "far_field_signal",
              "far_field_signal_err"},
             rows);
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run a sweep described by a config file");
    std::string sweep_config;
    sweep->add_option("--config", sweep_config, "config file")->required();
    add_io(sweep);
    sweep->callback([&] {
        const Config cfg = config_load(sweep_config);
        const auto records = run_sweep(cfg);
        std::vector<std::string> cols;
        std::vector<std::vector<double>> rows;
        records_to_table(records, cols, rows);
        Metadata meta = sweep_metadata(cfg, cmdline);
        const std::string path = !output.empty() ? output : cfg.sweep.output_path;
        emit(path, as_json, meta, cols, rows);
        if (!path.empty()) std::printf("wrote %zu records to %s\n", rows.size(), path.c_str());
    });

    // reproduce-figure
    auto* repro = app.add_subcommand("reproduce-figure", "run a stored figure recipe");
    std::string fig_id, recipes_dir = "recipes", outdir = ".";
    bool no_script = false;
    repro->add_option("id", fig_id, "fig1|fig3a|fig3b|fig3c|fig4|fig5|fig6|fig7")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig3a", "fig3b", "fig3c", "fig4", "fig5", "fig6", "fig7"}));
    repro->add_option("--recipes", recipes_dir, "recipe directory")->capture_default_str();
    repro->add_option("--outdir", outdir, "output directory")->capture_default_str();
    repro->add_flag("--no-script", no_script, "skip the gnuplot script");
    repro->callback([&] {
        std::vector<fs::path> recipe_files;
        if (!fs::is_directory(recipes_dir))
            throw validation_error("recipe directory '" + recipes_dir + "' not found");
        for (const auto& e : fs::directory_iterator(recipes_dir)) {
            const std::string stem = e.path().stem().string();
            if (e.path().extension() == ".cfg" &&
                (stem == fig_id || stem.rfind(fig_id + "_", 0) == 0))
                recipe_files.push_back(e.path());
        }
        std::sort(recipe_files.begin(), recipe_files.end());
        if (recipe_files.empty())
            throw validation_error("no recipe files for '" + fig_id + "' in " + recipes_dir);
        fs::create_directories(outdir);
        std::vector<std::pair<std::string, Config>> outputs;
        std::vector<std::vector<std::string>> columns;
        for (const auto& rf : recipe_files) {
            const Config cfg = config_load(rf.string());
            const auto records = run_sweep(cfg);
            std::vector<std::string> cols;
            std::vector<std::vector<double>> rows;
            records_to_table(records, cols, rows);
            Metadata meta = sweep_metadata(cfg, cmdline);
            meta.emplace_back("recipe", rf.filename().string());
            const fs::path csv = fs::path(outdir) / (rf.stem().string() + ".csv");
            write_csv_file(csv.string(), meta, cols, rows);
            std::printf("wrote %s (%zu records)\n", csv.string().c_str(), rows.size());
            outputs.emplace_back(csv.filename().string(), cfg);
            columns.push_back(std::move(cols));
        }
        if (!no_script) {
            const fs::path gp = fs::path(outdir) / (fig_id + ".gp");
            write_gnuplot_script(gp, fig_id, outputs, columns);
            std::printf("wrote %s\n", gp.string().c_str());
        }
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // usage error
    }
    return 0;
}

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
