#pragma once
// Shared parameter records and error types for the PCOPO workbench.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace pcopo {

struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Threshold proximity, singular matrices, diverging trajectories.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model parameters in the dimensionless cavity scaling.  delta0/delta1 are the
// uniform parts of the pump/signal detunings, M0/M1 the amplitudes of their
// sinusoidal spatial modulation, kp the modulation wavenumber.  kp defaults to
// 2*kc with kc = sqrt(-delta1/2), the resonant choice for which the four-mode
// closed forms hold.
struct ModelParams {
    double E = 0.0;
    double delta0 = 0.0;
    double delta1 = -1.0;
    double M0 = 0.0;
    double M1 = 0.0;
    std::optional<double> kp_explicit{};  // unset -> 2*kc

    double kc() const {
        if (delta1 >= 0.0)
            throw validation_error("kc undefined: delta1 must be negative");
        return std::sqrt(-delta1 / 2.0);
    }
    double kp() const { return kp_explicit ? *kp_explicit : 2.0 * kc(); }
    bool kp_resonant() const {
        if (!kp_explicit) return true;
        return std::abs(*kp_explicit - 2.0 * kc()) <= 1e-12 * (1.0 + 2.0 * kc());
    }
    void validate() const {
        if (!(E >= 0.0)) throw validation_error("E must be >= 0");
        if (!(M0 >= 0.0)) throw validation_error("M0 must be >= 0");
        if (!(M1 >= 0.0)) throw validation_error("M1 must be >= 0");
        if (!std::isfinite(E) || !std::isfinite(delta0) || !std::isfinite(delta1) ||
            !std::isfinite(M0) || !std::isfinite(M1))
            throw validation_error("non-finite model parameter");
        if (!kp_explicit && delta1 >= 0.0)
            throw validation_error("default kp = 2*kc requires delta1 < 0");
        if (kp_explicit && (!std::isfinite(*kp_explicit) || *kp_explicit <= 0.0))
            throw validation_error("kp must be positive and finite");
    }
};

enum class Scheme { split_step_exponential, semi_implicit };

// Stochastic engine configuration.  Defaults resolve the +-kc and +-kp modes
// exactly on the k-grid (box = 8 critical wavelengths).
struct SimConfig {
    int grid_points = 256;            // power of two
    double box_length = 0.0;          // 0 -> 8 * 2*pi/kc, resolved at run time
    double dt = 1e-3;
    double t_transient = 50.0;
    double t_measure = 200.0;
    int n_trajectories = 16;
    double noise_strength = 1.0;      // overall scale of both noise terms
    double signal_noise_q = -1.0;     // coefficient of alpha0 in <xi1 xi1>
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::split_step_exponential;
    double sample_stride = 0.5;       // time between stationary samples
    bool noise_enabled = true;

    double resolved_box(const ModelParams& p) const {
        return box_length > 0.0 ? box_length : 8.0 * 2.0 * M_PI / p.kc();
    }
    void validate(const ModelParams& p) const {
        if (grid_points < 8 || (grid_points & (grid_points - 1)) != 0)
            throw validation_error("grid_points must be a power of two >= 8");
        if (!(dt > 0.0) || !(t_transient >= 0.0) || !(t_measure > 0.0))
            throw validation_error("dt, t_transient, t_measure must be positive");
        if (n_trajectories < 1) throw validation_error("n_trajectories must be >= 1");
        if (!(noise_strength >= 0.0)) throw validation_error("noise_strength must be >= 0");
        if (!(sample_stride >= dt)) throw validation_error("sample_stride must be >= dt");
        const double L = resolved_box(p);
        // kc and kp must land exactly on the k-grid (multiples of 2*pi/L).
        const double dk = 2.0 * M_PI / L;
        auto commensurate = [&](double k) {
            const double r = k / dk;
            return std::abs(r - std::round(r)) < 1e-9 * (1.0 + std::abs(r));
        };
        if (!commensurate(p.kc()) || !commensurate(p.kp()))
            throw validation_error(
                "box_length incommensurate: kc and kp must lie exactly on the k-grid");
        // Largest linear rate on the grid (the exponential handles it exactly,
        // but a huge dt*rate means the splitting error is uncontrolled).
        const double kmax = M_PI * grid_points / L;
        const double rate = std::hypot(1.0, std::abs(p.delta1) + 2.0 * kmax * kmax);
        if (dt * rate >= 0.5)
            throw validation_error("stability guard violated: dt * max|linear eigenvalue| >= 0.5");
    }
};

}  // namespace pcopo
