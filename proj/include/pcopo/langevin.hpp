#pragma once
// Stochastic integrator for the full nonlinear field equations on a periodic
// 1-D transverse grid, plus ensemble statistics used to cross-validate the
// analytic engine.

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "pcopo/correlations.hpp"
#include "pcopo/params.hpp"

namespace pcopo {

struct FieldState {
    std::vector<cplx> alpha0;  // pump
    std::vector<cplx> alpha1;  // signal
    double t = 0.0;
};

// Sampled (antinormal-order) moments of the signal modes +-kc, or their
// vacuum-corrected counterparts; mirrors MomentSet.
struct SampledMoments {
    double n_plus = 0.0, n_minus = 0.0;
    cplx cross{}, plus{}, minus{}, hop{};
};

struct EnsembleStats {
    std::vector<double> k;  // ascending wavenumber grid
    std::vector<double> far_field_pump, far_field_signal;  // <|a(k)|^2>, mode units
    std::vector<double> far_field_pump_err, far_field_signal_err;
    SampledMoments moments;      // trajectory-mean antinormal moments
    SampledMoments moments_err;  // standard errors (component-wise)
    std::vector<SampledMoments> per_trajectory;
    int n_trajectories = 0;
    double t_measure = 0.0;
    int samples_per_trajectory = 0;
};

// Owns FFTW plans and scratch; one per worker thread.
class StepWorkspace {
  public:
    StepWorkspace(const ModelParams& p, const SimConfig& c);
    ~StepWorkspace();
    StepWorkspace(const StepWorkspace&) = delete;
    StepWorkspace& operator=(const StepWorkspace&) = delete;

    // One symmetric split step of size dt.
    void step(FieldState& s, std::mt19937_64& rng);
    // Far-field amplitudes in mode units: a(k) = dx/sqrt(L) * FFT[alpha](k).
    std::vector<cplx> mode_amplitudes(const std::vector<cplx>& field);
    // Signal modes at +-kc.
    std::pair<cplx, cplx> signal_kc_modes(const FieldState& s);

    const std::vector<double>& kgrid() const { return k_; }  // FFT ordering
    int kc_bin() const { return kc_bin_; }
    int kp_bin() const { return kp_bin_; }

    struct Impl;

  private:
    friend EnsembleStats run_ensemble(const ModelParams&, const SimConfig&);
    friend struct TrajectoryRunner;
    void half_linear(FieldState& s);
    void full_linear(FieldState& s);
    void nonlinear_and_noise(FieldState& s, std::mt19937_64& rng);
    std::unique_ptr<Impl> impl_;
    std::vector<double> k_;
    int kc_bin_ = 0, kp_bin_ = 0;
    ModelParams p_;
    SimConfig c_;
};

FieldState initial_state(const ModelParams& p, const SimConfig& c);

// Transient + stationary ensemble averages over independent trajectories.
// Deterministic for fixed (seed, config) regardless of worker count.
EnsembleStats run_ensemble(const ModelParams& p, const SimConfig& c);

struct NearFieldRecord {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<std::vector<double>> re_alpha1;  // one row per sample time
    std::vector<double> pattern_phase;           // fringe phase of the kc pattern
};
NearFieldRecord near_field_record(const ModelParams& p, const SimConfig& c);

// Circular variance of 2*phase (the pattern is pi-periodic in phase):
// ~0 for a locked pattern, grows toward 1 under phase diffusion.
double circular_variance_2phase(const std::vector<double>& phase);

struct VarianceMap {
    std::vector<double> theta, phi;
    std::vector<double> value;   // row-major, theta outer
    std::vector<double> stderr_; // per cell
    double at(int it, int ip) const { return value[static_cast<size_t>(it) * phi.size() + ip]; }
};

// Intracavity variance angle-map from sampled moments, vacuum-corrected with
// an E = 0 control run of identical configuration (shifted seed).
VarianceMap intracavity_variance_map(const ModelParams& p, const SimConfig& c,
                                     const std::vector<double>& theta_grid,
                                     const std::vector<double>& phi_grid);

// The analytic counterpart of the intracavity map (output moments halved).
VarianceMap analytic_intracavity_map(const ModelParams& p, const std::vector<double>& theta_grid,
                                     const std::vector<double>& phi_grid);

}  // namespace pcopo
