#pragma once
// Steady-state pump harmonics, linear-response matrices of the reduced
// four-mode model (and its six-mode generalisation), closed-form and numeric
// inversion, and the input-output transfer matrix.

#include <complex>
#include <Eigen/Dense>

#include "pcopo/params.hpp"

namespace pcopo {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

struct PumpSteadyState {
    cplx a0_0;      // harmonic k = 0
    cplx a0_plus;   // harmonic +kp
    cplx a0_minus;  // harmonic -kp (= -a0_plus)
};

struct CouplingConstants {
    cplx S;      // effective pump amplitude of the reduced model
    cplx kappa;  // harmonic coupling ratio, A0(+kp) = kappa * S
};

// Three-harmonic pump steady state of the truncated coupled-mode system
// (harmonics beyond +-kp dropped).
PumpSteadyState pump_steady_state(const ModelParams& p);

// S and kappa of the resonant reduction (kp = 2*kc required).
CouplingConstants coupling_constants(const ModelParams& p);

// The 4x4 linear-response matrix of the (a(kc), a(-kc), a+(kc), a+(-kc))
// fluctuation vector at analysis frequency omega.
ComplexMatrix build_L(const ModelParams& p, double omega);

// Six-mode matrix at general transverse wavenumber k (modes k, k+kp, k-kp and
// conjugates); valid for any kp, |k| <= kp.
ComplexMatrix build_L6(const ModelParams& p, double k, double omega);

// Denominator D(omega) of the closed-form inverse; vanishes at threshold.
cplx closed_D(const ModelParams& p, double omega);

// The scalar pieces the closed-form inverse is assembled from; exposed so the
// spectral closed forms can reuse W, Z, W', Z', D.
struct ClosedInverseParts {
    cplx D, U, Up, V, Vp, W, Wp, Z, Zp;
};
ClosedInverseParts closed_inverse_parts(const ModelParams& p, double omega);

// Closed-form inverse of build_L.  Throws numerical_error when |D| is below
// `floor` relative to the empty-cavity scale.
ComplexMatrix invert_L_closed(const ModelParams& p, double omega, double floor = 1e-12);

// Numeric inverse (pivoted LU) with a condition guard; the oracle for the
// closed form.  Returns the inverse; max residual available via invert_residual.
ComplexMatrix invert_numeric(const ComplexMatrix& m, double cond_bound = 1e14);
double invert_residual(const ComplexMatrix& m, const ComplexMatrix& minv);

// Input-output transfer matrix 2*L^-1 - I (numeric-inverse path).
ComplexMatrix transfer_matrix(const ModelParams& p, double omega);

}  // namespace pcopo
