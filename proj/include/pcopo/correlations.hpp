#pragma once
// Below-threshold observables of the reduced model: spectra, stationary
// moments, quadrature variances, entanglement criteria, twin beams, threshold.

#include <vector>

#include "pcopo/model_core.hpp"

namespace pcopo {

// Stationary normally-ordered second moments of the output modes +-kc.
struct MomentSet {
    double n_plus = 0.0;   // <a+(kc) a(kc)>
    double n_minus = 0.0;  // <a+(-kc) a(-kc)>
    cplx anom_cross{};     // <a(kc) a(-kc)>
    cplx anom_plus{};      // <a(kc) a(kc)>
    cplx anom_minus{};     // <a(-kc) a(-kc)>
    cplx hop{};            // <a+(-kc) a(kc)>
};

struct QuadratureSpec {
    double theta = 0.0;
    double phi = 0.0;
};

enum class DuanBound {
    as_printed,  // 2*(w^2 + 1/w)
    standard,    // 2*(w^2 + 1/w^2); identical at w = 1
};

struct EntanglementReport {
    double duan_sum = 0.0;
    double duan_bound = 0.0;
    double duan_weight = 1.0;
    double reid_product = 0.0;
    double reid_lambda = 0.0;
    bool entangled_duan = false;
    bool entangled_reid = false;
};

struct TwinBeamReport {
    double raw_variance = 0.0;  // <: (n(kc) - n(-kc))^2 :>
    double shot_noise = 0.0;    // n(kc) + n(-kc)
    double normalized = 0.0;
};

struct MinVarianceResult {
    double value;
    double theta_star;
    double phi_star;
};

// Denominator sigma of the stationary intensity; threshold is its first zero.
double sigma_den(const ModelParams& p);

// Smallest E > 0 with sigma_den = 0 (bracketing + bisection to `tol` in E).
double threshold(const ModelParams& p, double e_max = 4.0, double tol = 1e-9);

// True when the stationary linearized response exists (E below the first
// zero of sigma; sigma alone is not a valid test, it is a perfect square for
// M0 = 0 and stays positive on both sides).
bool below_threshold(const ModelParams& p);

// Stationary photon number of the output mode kc (closed form).
double intensity(const ModelParams& p, double floor = 1e-12);

// Spectral intensity n(kc, omega) via the transfer matrix; the closed-form
// route is spectral_intensity_closed (the two agree to roundoff).
double spectral_intensity(const ModelParams& p, double omega);
double spectral_intensity_closed(const ModelParams& p, double omega);

// All six stationary moments, closed forms.
MomentSet second_moments(const ModelParams& p, double floor = 1e-12);

// Same moments via the Lyapunov route: A X + X A^T = N with A = L(0).
// Independent oracle for the closed forms (and the frequency quadrature).
MomentSet second_moments_lyapunov(const ModelParams& p);

// Same moments by adaptive quadrature of the transfer-matrix spectra.
MomentSet second_moments_quadrature(const ModelParams& p);

// Variance of the two-mode superposition Sigma_{theta,phi} with weight w
// (w = 1 is the paper's Sigma); vacuum level is 2 at w = 1.
double quadrature_variance(const ModelParams& p, const QuadratureSpec& q, double weight = 1.0);
double quadrature_variance(const MomentSet& m, const QuadratureSpec& q, double weight = 1.0);

// Pieces of the variance: <x1^2>, <x2^2>, <x1 x2> (weight-independent).
struct VarianceParts {
    double x1x1, x2x2, x1x2;
};
VarianceParts variance_parts(const MomentSet& m, const QuadratureSpec& q);

// Global minimum over angles: coarse grid then local refinement.
MinVarianceResult min_variance(const ModelParams& p, int n_theta = 181, int n_phi = 181);

EntanglementReport duan_criterion(const ModelParams& p, const QuadratureSpec& q,
                                  double weight = 1.0,
                                  DuanBound bound = DuanBound::as_printed);
EntanglementReport reid_criterion(const ModelParams& p, const QuadratureSpec& q);

struct EntanglementMap {
    std::vector<double> theta, phi;
    std::vector<EntanglementReport> cells;  // row-major, theta outer
    double duan_area = 0.0;                 // fraction of cells entangled
    double reid_area = 0.0;
    const EntanglementReport& at(int it, int ip) const {
        return cells[static_cast<size_t>(it) * phi.size() + ip];
    }
};
EntanglementMap entanglement_map(const ModelParams& p, const std::vector<double>& theta_grid,
                                 const std::vector<double>& phi_grid);

TwinBeamReport twin_beams(const ModelParams& p);

// Closed form for the raw (normally ordered) twin-beam variance at M0 = 0;
// dividing by the shot noise gives the normalized value.
double twin_beams_m0zero_closed(double E, double M1);

}  // namespace pcopo
