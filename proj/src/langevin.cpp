#include "pcopo/langevin.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <mutex>
#include <thread>

#include <fftw3.h>

namespace pcopo {

namespace {
const cplx I{0.0, 1.0};
std::mutex fftw_plan_mutex;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::mt19937_64 trajectory_rng(std::uint64_t seed, int traj) {
    return std::mt19937_64(splitmix64(splitmix64(seed) + traj));
}
}  // namespace

struct StepWorkspace::Impl {
    int N;
    double dx, L;
    std::vector<cplx> e_half0, e_full0, e_half1, e_full1;  // linear exponentials
    std::vector<double> mod0, mod1;                        // Mi * sin(kp x)
    std::vector<cplx> scratch, scratch2;
    fftw_plan fwd = nullptr, bwd = nullptr;
    std::normal_distribution<double> gauss{0.0, 1.0};

    ~Impl() {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex);
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
    }
    void fft(std::vector<cplx>& a, fftw_plan plan) {
        auto* ptr = reinterpret_cast<fftw_complex*>(a.data());
        fftw_execute_dft(plan, ptr, ptr);
    }
};

StepWorkspace::StepWorkspace(const ModelParams& p, const SimConfig& c) : p_(p), c_(c) {
    p.validate();
    c.validate(p);
    impl_ = std::make_unique<Impl>();
    auto& im = *impl_;
    im.N = c.grid_points;
    im.L = c.resolved_box(p);
    im.dx = im.L / im.N;
    k_.resize(im.N);
    const double dk = 2.0 * M_PI / im.L;
    for (int i = 0; i < im.N; ++i) k_[i] = dk * (i <= im.N / 2 ? i : i - im.N);
    kc_bin_ = static_cast<int>(std::lround(p.kc() / dk));
    kp_bin_ = static_cast<int>(std::lround(p.kp() / dk));

    im.e_half0.resize(im.N);
    im.e_full0.resize(im.N);
    im.e_half1.resize(im.N);
    im.e_full1.resize(im.N);
    for (int i = 0; i < im.N; ++i) {
        const double k2 = k_[i] * k_[i];
        const cplx l0 = -(1.0 + I * (p.delta0 + k2));
        const cplx l1 = -(1.0 + I * (p.delta1 + 2.0 * k2));
        im.e_half0[i] = std::exp(l0 * (0.5 * c.dt));
        im.e_full0[i] = std::exp(l0 * c.dt);
        im.e_half1[i] = std::exp(l1 * (0.5 * c.dt));
        im.e_full1[i] = std::exp(l1 * c.dt);
    }
    im.mod0.resize(im.N);
    im.mod1.resize(im.N);
    for (int i = 0; i < im.N; ++i) {
        const double x = i * im.dx;
        im.mod0[i] = p.M0 * std::sin(p.kp() * x);
        im.mod1[i] = p.M1 * std::sin(p.kp() * x);
    }
    im.scratch.resize(im.N);
    im.scratch2.resize(im.N);
    {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex);
        auto* buf = reinterpret_cast<fftw_complex*>(im.scratch.data());
        im.fwd = fftw_plan_dft_1d(im.N, buf, buf, FFTW_FORWARD,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
        im.bwd = fftw_plan_dft_1d(im.N, buf, buf, FFTW_BACKWARD,
                                  FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
}

StepWorkspace::~StepWorkspace() = default;

namespace {
void apply_linear(StepWorkspace::Impl& im, std::vector<cplx>& field,
                  const std::vector<cplx>& phase) {
    im.fft(field, im.fwd);
    const double inv = 1.0 / im.N;
    for (int i = 0; i < im.N; ++i) field[i] *= phase[i] * inv;
    im.fft(field, im.bwd);
}
}  // namespace

void StepWorkspace::half_linear(FieldState& s) {
    apply_linear(*impl_, s.alpha0, impl_->e_half0);
    apply_linear(*impl_, s.alpha1, impl_->e_half1);
}

void StepWorkspace::full_linear(FieldState& s) {
    apply_linear(*impl_, s.alpha0, impl_->e_full0);
    apply_linear(*impl_, s.alpha1, impl_->e_full1);
}

void StepWorkspace::nonlinear_and_noise(FieldState& s, std::mt19937_64& rng) {
    auto& im = *impl_;
    const int N = im.N;
    const double dt = c_.dt;
    auto d0 = [&](const cplx& a0, const cplx& a1, int i) {
        return p_.E - 0.5 * a1 * a1 - I * im.mod0[i] * a0;
    };
    auto d1 = [&](const cplx& a0, const cplx& a1, int i) {
        return a0 * std::conj(a1) - I * im.mod1[i] * a1;
    };
    // Midpoint treatment of the non-stiff terms (the linear stiff part is
    // handled exactly in k-space).  The semi-implicit variant iterates the
    // midpoint to a fixed point instead of predicting it explicitly.
    std::vector<cplx>& a0m = im.scratch;  // midpoint pump, reused for noise below
    std::vector<cplx>& a1m = im.scratch2;
    const int fixed_point_iters = c_.scheme == Scheme::semi_implicit ? 3 : 1;
    for (int i = 0; i < N; ++i) {
        a0m[i] = s.alpha0[i];
        a1m[i] = s.alpha1[i];
    }
    for (int it = 0; it < fixed_point_iters; ++it) {
        for (int i = 0; i < N; ++i) {
            const cplx m0 = s.alpha0[i] + 0.5 * dt * d0(a0m[i], a1m[i], i);
            const cplx m1 = s.alpha1[i] + 0.5 * dt * d1(a0m[i], a1m[i], i);
            a0m[i] = m0;
            a1m[i] = m1;
        }
    }
    for (int i = 0; i < N; ++i) {
        s.alpha0[i] += dt * d0(a0m[i], a1m[i], i);
        s.alpha1[i] += dt * d1(a0m[i], a1m[i], i);
    }
    if (c_.noise_enabled && c_.noise_strength > 0.0) {
        // <xi xi*> = 2 ns d(x-x') d(t-t') for both fields; the signal noise has
        // in addition <xi1 xi1> = q ns alpha0 d d, realised per site as
        // xi = sqrt(ph) (m z + n conj(z)) with m^2+n^2 = A/2, m n = |B|/4.
        const double A = 2.0 * c_.noise_strength * dt / im.dx;
        const double amp0 = std::sqrt(0.5 * A);
        for (int i = 0; i < N; ++i)
            s.alpha0[i] += amp0 * cplx{im.gauss(rng), im.gauss(rng)};
        for (int i = 0; i < N; ++i) {
            const cplx B = c_.signal_noise_q * c_.noise_strength * a0m[i] * dt / im.dx;
            const double ab = std::abs(B);
            const double disc = std::sqrt(std::max(0.25 * A * A - 0.25 * ab * ab, 0.0));
            const double mm = std::sqrt(0.5 * (0.5 * A + disc));
            const double nn = std::sqrt(std::max(0.5 * (0.5 * A - disc), 0.0));
            const cplx ph = ab > 0.0 ? std::sqrt(B / ab) : cplx{1.0, 0.0};
            const cplx z{im.gauss(rng), im.gauss(rng)};
            s.alpha1[i] += ph * (mm * z + nn * std::conj(z));
        }
    }
    s.t += dt;
}

void StepWorkspace::step(FieldState& s, std::mt19937_64& rng) {
    half_linear(s);
    nonlinear_and_noise(s, rng);
    half_linear(s);
}

std::vector<cplx> StepWorkspace::mode_amplitudes(const std::vector<cplx>& field) {
    auto& im = *impl_;
    std::vector<cplx> out = field;
    im.fft(out, im.fwd);
    const double scale = im.dx / std::sqrt(im.L);
    for (auto& v : out) v *= scale;
    return out;
}

std::pair<cplx, cplx> StepWorkspace::signal_kc_modes(const FieldState& s) {
    const auto a = mode_amplitudes(s.alpha1);
    return {a[kc_bin_], a[impl_->N - kc_bin_]};
}

FieldState initial_state(const ModelParams& p, const SimConfig& c) {
    FieldState s;
    s.alpha0.assign(c.grid_points, cplx{});
    s.alpha1.assign(c.grid_points, cplx{});
    return s;
}

namespace {
struct TrajResult {
    std::vector<double> far0, far1;
    SampledMoments mom;
    int samples = 0;
};
}  // namespace

struct TrajectoryRunner {
    const ModelParams& p;
    const SimConfig& c;

    TrajResult run(StepWorkspace& ws, int traj) const {
        auto rng = trajectory_rng(c.seed, traj);
        FieldState s = initial_state(p, c);
        const int N = c.grid_points;
        TrajResult r;
        r.far0.assign(N, 0.0);
        r.far1.assign(N, 0.0);
        const int total = static_cast<int>(std::llround((c.t_transient + c.t_measure) / c.dt));
        const int every = std::max(1, static_cast<int>(std::llround(c.sample_stride / c.dt)));
        const int kcb = ws.kc_bin();
        ws.half_linear(s);  // enter the interleaved splitting
        for (int i = 1; i <= total; ++i) {
            ws.nonlinear_and_noise(s, rng);
            const bool sample = (i % every == 0) && (i * c.dt > c.t_transient);
            if (sample) {
                ws.half_linear(s);
                const auto a0 = ws.mode_amplitudes(s.alpha0);
                const auto a1 = ws.mode_amplitudes(s.alpha1);
                if (!std::isfinite(std::norm(a1[kcb])) || !std::isfinite(std::norm(a0[0])))
                    throw numerical_error("trajectory " + std::to_string(traj) +
                                          " diverged at t = " + std::to_string(s.t));
                for (int j = 0; j < N; ++j) {
                    r.far0[j] += std::norm(a0[j]);
                    r.far1[j] += std::norm(a1[j]);
                }
                const cplx ap = a1[kcb], am = a1[N - kcb];
                r.mom.n_plus += std::norm(ap);
                r.mom.n_minus += std::norm(am);
                r.mom.cross += ap * am;
                r.mom.plus += ap * ap;
                r.mom.minus += am * am;
                r.mom.hop += std::conj(am) * ap;
                ++r.samples;
                if (i < total) ws.half_linear(s);
            } else if (i < total) {
                ws.full_linear(s);
            }
        }
        const double inv = 1.0 / std::max(1, r.samples);
        for (auto& v : r.far0) v *= inv;
        for (auto& v : r.far1) v *= inv;
        r.mom.n_plus *= inv;
        r.mom.n_minus *= inv;
        r.mom.cross *= inv;
        r.mom.plus *= inv;
        r.mom.minus *= inv;
        r.mom.hop *= inv;
        return r;
    }
};

namespace {
int worker_count(int n_traj) {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("PCOPO_WORKERS")) n = std::atoi(env);
    return std::clamp(n, 1, n_traj);
}
}  // namespace

EnsembleStats run_ensemble(const ModelParams& p, const SimConfig& c) {
    p.validate();
    c.validate(p);
    const int nt = c.n_trajectories;
    std::vector<TrajResult> results(nt);
    std::vector<std::exception_ptr> errors(nt);
    std::atomic<int> next{0};
    const TrajectoryRunner runner{p, c};
    auto work = [&]() {
        StepWorkspace ws(p, c);
        for (int i = next.fetch_add(1); i < nt; i = next.fetch_add(1)) {
            try {
                results[i] = runner.run(ws, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nw = worker_count(nt);
    if (nw == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nw; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    // Reduction in fixed trajectory order so results are replayable bit for bit.
    const int N = c.grid_points;
    EnsembleStats st;
    st.n_trajectories = nt;
    st.t_measure = c.t_measure;
    st.samples_per_trajectory = results[0].samples;
    st.per_trajectory.reserve(nt);
    std::vector<double> f0(N, 0.0), f1(N, 0.0), f0s(N, 0.0), f1s(N, 0.0);
    SampledMoments ms{}, m2{};
    for (const auto& r : results) {
        st.per_trajectory.push_back(r.mom);
        for (int j = 0; j < N; ++j) {
            f0[j] += r.far0[j];
            f0s[j] += r.far0[j] * r.far0[j];
            f1[j] += r.far1[j];
            f1s[j] += r.far1[j] * r.far1[j];
        }
        ms.n_plus += r.mom.n_plus;
        m2.n_plus += r.mom.n_plus * r.mom.n_plus;
        ms.n_minus += r.mom.n_minus;
        m2.n_minus += r.mom.n_minus * r.mom.n_minus;
        auto acc = [](cplx& sum, cplx& sq, const cplx& v) {
            sum += v;
            sq += cplx{v.real() * v.real(), v.imag() * v.imag()};
        };
        acc(ms.cross, m2.cross, r.mom.cross);
        acc(ms.plus, m2.plus, r.mom.plus);
        acc(ms.minus, m2.minus, r.mom.minus);
        acc(ms.hop, m2.hop, r.mom.hop);
    }
    auto stderr_of = [nt](double sum, double sq) {
        if (nt < 2) return 0.0;
        const double mean = sum / nt;
        const double var = std::max(0.0, sq / nt - mean * mean);
        return std::sqrt(var / (nt - 1));
    };
    // Reorder far fields to ascending k.
    st.k.resize(N);
    st.far_field_pump.resize(N);
    st.far_field_signal.resize(N);
    st.far_field_pump_err.resize(N);
    st.far_field_signal_err.resize(N);
    const double dk = 2.0 * M_PI / c.resolved_box(p);
    for (int j = 0; j < N; ++j) {
        const int src = (j + N / 2) % N;  // shift so k ascends from -N/2*dk
        st.k[j] = dk * (j - N / 2);
        st.far_field_pump[j] = f0[src] / nt;
        st.far_field_signal[j] = f1[src] / nt;
        st.far_field_pump_err[j] = stderr_of(f0[src], f0s[src]);
        st.far_field_signal_err[j] = stderr_of(f1[src], f1s[src]);
    }
    st.moments.n_plus = ms.n_plus / static_cast<double>(nt);
    st.moments.n_minus = ms.n_minus / static_cast<double>(nt);
    st.moments.cross = ms.cross / static_cast<double>(nt);
    st.moments.plus = ms.plus / static_cast<double>(nt);
    st.moments.minus = ms.minus / static_cast<double>(nt);
    st.moments.hop = ms.hop / static_cast<double>(nt);
    st.moments_err.n_plus = stderr_of(ms.n_plus, m2.n_plus);
    st.moments_err.n_minus = stderr_of(ms.n_minus, m2.n_minus);
    auto cerr_ = [&](const cplx& sum, const cplx& sq) {
        return cplx{stderr_of(sum.real(), sq.real()), stderr_of(sum.imag(), sq.imag())};
    };
    st.moments_err.cross = cerr_(ms.cross, m2.cross);
    st.moments_err.plus = cerr_(ms.plus, m2.plus);
    st.moments_err.minus = cerr_(ms.minus, m2.minus);
    st.moments_err.hop = cerr_(ms.hop, m2.hop);
    return st;
}

NearFieldRecord near_field_record(const ModelParams& p, const SimConfig& c) {
    p.validate();
    c.validate(p);
    StepWorkspace ws(p, c);
    auto rng = trajectory_rng(c.seed, 0);
    FieldState s = initial_state(p, c);
    NearFieldRecord rec;
    const int N = c.grid_points;
    const double dx = c.resolved_box(p) / N;
    rec.x.resize(N);
    for (int i = 0; i < N; ++i) rec.x[i] = i * dx;
    const int total = static_cast<int>(std::llround((c.t_transient + c.t_measure) / c.dt));
    const int every = std::max(1, static_cast<int>(std::llround(c.sample_stride / c.dt)));
    for (int i = 1; i <= total; ++i) {
        ws.step(s, rng);
        if (i % every == 0) {
            rec.t.push_back(s.t);
            std::vector<double> row(N);
            for (int j = 0; j < N; ++j) row[j] = s.alpha1[j].real();
            rec.re_alpha1.push_back(std::move(row));
            // Fringe phase of the real near field: Re alpha1 ~ |z| cos(kc x + arg z)
            // with z = a(+kc) + conj(a(-kc)); a rigid translation by d maps
            // z -> z e^{i kc d}, so arg z tracks the pattern position.
            const auto [ap, am] = ws.signal_kc_modes(s);
            rec.pattern_phase.push_back(std::arg(ap + std::conj(am)));
        }
    }
    return rec;
}

double circular_variance_2phase(const std::vector<double>& phase) {
    if (phase.empty()) return 0.0;
    cplx sum{};
    for (double ph : phase) sum += std::exp(cplx{0.0, 2.0 * ph});
    return 1.0 - std::abs(sum) / static_cast<double>(phase.size());
}

namespace {
double variance_cell(const SampledMoments& m, double th, double ph) {
    // Normal-ordered moments + unit commutator per mode.
    const cplx e2t = std::exp(2.0 * I * th);
    const cplx e2tp = std::exp(2.0 * I * (th + ph));
    const double x1 = 2.0 * std::real(m.plus * e2t) + 2.0 * m.n_plus + 1.0;
    const double x2 = 2.0 * std::real(m.minus * e2tp) + 2.0 * m.n_minus + 1.0;
    const double x12 = 2.0 * std::real(m.cross * std::exp(I * (2.0 * th + ph))) +
                       2.0 * std::real(std::conj(m.hop) * std::exp(I * ph));
    return x1 + x2 + 2.0 * x12;
}
}  // namespace

VarianceMap intracavity_variance_map(const ModelParams& p, const SimConfig& c,
                                     const std::vector<double>& theta_grid,
                                     const std::vector<double>& phi_grid) {
    const EnsembleStats run = run_ensemble(p, c);
    ModelParams p0 = p;
    p0.E = 0.0;
    SimConfig c0 = c;
    c0.seed = splitmix64(c.seed ^ 0x7061747465726Eull);  // independent control stream
    const EnsembleStats ctrl = run_ensemble(p0, c0);

    const int nt = run.n_trajectories;
    VarianceMap map;
    map.theta = theta_grid;
    map.phi = phi_grid;
    map.value.assign(theta_grid.size() * phi_grid.size(), 0.0);
    map.stderr_.assign(map.value.size(), 0.0);
    std::vector<double> cell_sum(map.value.size(), 0.0), cell_sq(map.value.size(), 0.0);
    // Sampled moments scale with the noise strength; normalizing recovers the
    // quantum (per-vacuum-unit) moments that the analytic map uses.
    const double inv_ns = 1.0 / c.noise_strength;
    for (int tr = 0; tr < nt; ++tr) {
        // Vacuum-corrected (normal-order) moments for this trajectory.
        SampledMoments m = run.per_trajectory[tr];
        const SampledMoments& v = ctrl.per_trajectory[tr];
        m.n_plus = (m.n_plus - v.n_plus) * inv_ns;
        m.n_minus = (m.n_minus - v.n_minus) * inv_ns;
        m.cross = (m.cross - v.cross) * inv_ns;
        m.plus = (m.plus - v.plus) * inv_ns;
        m.minus = (m.minus - v.minus) * inv_ns;
        m.hop = (m.hop - v.hop) * inv_ns;
        size_t idx = 0;
        for (double th : theta_grid)
            for (double ph : phi_grid) {
                const double val = variance_cell(m, th, ph);
                cell_sum[idx] += val;
                cell_sq[idx] += val * val;
                ++idx;
            }
    }
    for (size_t i = 0; i < map.value.size(); ++i) {
        map.value[i] = cell_sum[i] / nt;
        if (nt > 1) {
            const double var = std::max(0.0, cell_sq[i] / nt - map.value[i] * map.value[i]);
            map.stderr_[i] = std::sqrt(var / (nt - 1));
        }
    }
    return map;
}

VarianceMap analytic_intracavity_map(const ModelParams& p, const std::vector<double>& theta_grid,
                                     const std::vector<double>& phi_grid) {
    const MomentSet out = second_moments(p);
    SampledMoments m;  // intracavity = half the output moments
    m.n_plus = 0.5 * out.n_plus;
    m.n_minus = 0.5 * out.n_minus;
    m.cross = 0.5 * out.anom_cross;
    m.plus = 0.5 * out.anom_plus;
    m.minus = 0.5 * out.anom_minus;
    m.hop = 0.5 * out.hop;
    VarianceMap map;
    map.theta = theta_grid;
    map.phi = phi_grid;
    map.value.reserve(theta_grid.size() * phi_grid.size());
    for (double th : theta_grid)
        for (double ph : phi_grid) map.value.push_back(variance_cell(m, th, ph));
    map.stderr_.assign(map.value.size(), 0.0);
    return map;
}

}  // namespace pcopo
