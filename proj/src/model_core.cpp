#include "pcopo/model_core.hpp"

namespace pcopo {

namespace {
const cplx I{0.0, 1.0};

// 1 + i*delta0 + i*kp^2: the linear response of the pump harmonic at +-kp.
cplx pump_harmonic_den(const ModelParams& p) {
    const double kp2 = p.kp() * p.kp();
    return 1.0 + I * (p.delta0 + kp2);
}
}  // namespace

PumpSteadyState pump_steady_state(const ModelParams& p) {
    p.validate();
    const cplx d0 = 1.0 + I * p.delta0;
    const cplx dp = pump_harmonic_den(p);
    // Truncated harmonic balance: (1+i d0) A0 = E + M0 A(+kp),
    // A(+kp) = -(M0/2) A0 / (1 + i(d0+kp^2)), A(-kp) = -A(+kp).
    const cplx a0 = p.E * dp / (d0 * dp + p.M0 * p.M0 / 2.0);
    const cplx ap = -(p.M0 / 2.0) * a0 / dp;
    return {a0, ap, -ap};
}

CouplingConstants coupling_constants(const ModelParams& p) {
    p.validate();
    if (p.delta1 >= 0.0) throw validation_error("coupling constants require delta1 < 0");
    if (!p.kp_resonant())
        throw validation_error("closed-form reduction requires kp = 2*kc");
    const cplx dp = pump_harmonic_den(p);  // = 1 + i delta0 - 2 i delta1 at resonance
    const cplx d0 = 1.0 + I * p.delta0;
    const cplx kappa = -(p.M0 / 2.0) / dp;
    const cplx S = p.E * dp / (d0 * dp + p.M0 * p.M0 / 2.0);  // = A0(0)
    return {S, kappa};
}

ComplexMatrix build_L(const ModelParams& p, double omega) {
    const auto [S, k] = coupling_constants(p);
    const cplx Sc = std::conj(S), kc_ = std::conj(k);
    const cplx d = 1.0 - I * omega;
    const double m = p.M1 / 2.0;
    ComplexMatrix L(4, 4);
    L << d, m, -S, -k * S,
        -m, d, k * S, -S,
        -Sc, kc_ * Sc, d, -m,
        -kc_ * Sc, -Sc, m, d;
    return L;
}

ComplexMatrix build_L6(const ModelParams& p, double k, double omega) {
    p.validate();
    const double kp = p.kp();
    if (std::abs(k) > kp * (1.0 + 1e-12))
        throw validation_error("build_L6 requires |k| <= kp");
    const cplx S = pump_steady_state(p).a0_0;
    const cplx kb = -(p.M0 / 2.0) / (1.0 + I * (p.delta0 + kp * kp));
    const cplx Sc = std::conj(S), kbc = std::conj(kb);
    const double m = p.M1 / 2.0;
    auto eta = [&](double n) {
        const double q = k + n * kp;
        return -I * omega + 1.0 + I * (p.delta1 + 2.0 * q * q);
    };
    auto etap = [&](double n) {
        const double q = k + n * kp;
        return -I * omega + 1.0 - I * (p.delta1 + 2.0 * q * q);
    };
    ComplexMatrix L(6, 6);
    L << eta(0), -m, m, -S, kb * S, -kb * S,
        m, eta(1), 0, -kb * S, -S, 0,
        -m, 0, eta(-1), kb * S, 0, -S,
        -Sc, -kbc * Sc, kbc * Sc, etap(0), m, -m,
        kbc * Sc, -Sc, 0, -m, etap(1), 0,
        -kbc * Sc, 0, -Sc, m, 0, etap(-1);
    return L;
}

// Closed-form inverse.  L has a 2x2 block structure over the commuting algebra
// generated by J = [[0,1],[-1,0]]; inverting in that algebra gives the exact
// adjugate below.  Cross term in D uses 1+|kappa|^2 (with the complex
// 1+kappa^2 variant the product L*L^-1 fails to be the identity).
namespace {
ClosedInverseParts closed_parts(const CouplingConstants& cc, double M1, double omega) {
    const cplx S = cc.S, k = cc.kappa;
    const cplx Sc = std::conj(S), kc_ = std::conj(k);
    const double s2 = std::norm(S);
    const cplx iw{0.0, omega};
    const cplx c2 = -0.5 * (M1 * M1 - 4.0 * (I + omega) * (I + omega));
    const cplx c3 = s2 * (k - kc_);
    const double c1t = 2.0 * s2 * (1.0 + std::norm(k));
    const cplx phi = -0.5 * (c1t + c2);
    const cplx a = 1.0 - iw;
    const double m = M1 / 2.0;
    ClosedInverseParts r;
    r.D = phi * phi + c3 * c3;
    r.U = phi * a + m * c3;
    r.Up = phi * a - m * c3;
    r.V = a * c3 - phi * m;
    r.Vp = a * c3 + phi * m;
    r.W = S * (phi - c3 * k);
    r.Z = S * (c3 + phi * k);
    r.Wp = Sc * (phi + c3 * kc_);
    r.Zp = Sc * (c3 - phi * kc_);
    return r;
}
}  // namespace

cplx closed_D(const ModelParams& p, double omega) {
    return closed_parts(coupling_constants(p), p.M1, omega).D;
}

ClosedInverseParts closed_inverse_parts(const ModelParams& p, double omega) {
    return closed_parts(coupling_constants(p), p.M1, omega);
}

ComplexMatrix invert_L_closed(const ModelParams& p, double omega, double floor) {
    const auto cc = coupling_constants(p);
    const auto c = closed_parts(cc, p.M1, omega);
    // Empty-cavity scale of D at the same omega: ((1-iw)^2 + M1^2/4 + 1)^2-ish;
    // use |D(E=0)| so the floor tracks the omega dependence.
    ModelParams p0 = p;
    p0.E = 0.0;
    const cplx D0 = closed_parts(coupling_constants(p0), p.M1, omega).D;
    if (std::abs(c.D) < floor * std::abs(D0))
        throw numerical_error("invert_L_closed: |D(omega)| below floor (at/above threshold?)");
    ComplexMatrix M(4, 4);
    M << c.U, c.V, c.W, c.Z,
        -c.V, c.U, -c.Z, c.W,
        c.Wp, c.Zp, c.Up, c.Vp,
        -c.Zp, c.Wp, -c.Vp, c.Up;
    return M / c.D;
}

ComplexMatrix invert_numeric(const ComplexMatrix& m, double cond_bound) {
    if (m.rows() != m.cols()) throw validation_error("invert_numeric: matrix not square");
    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    const ComplexMatrix inv = lu.inverse();
    // Cheap condition estimate: ||m||_inf * ||m^-1||_inf.
    const double cond = m.cwiseAbs().rowwise().sum().maxCoeff() *
                        inv.cwiseAbs().rowwise().sum().maxCoeff();
    if (!std::isfinite(cond) || cond > cond_bound)
        throw numerical_error("invert_numeric: matrix singular or ill-conditioned");
    return inv;
}

double invert_residual(const ComplexMatrix& m, const ComplexMatrix& minv) {
    return (m * minv - ComplexMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

ComplexMatrix transfer_matrix(const ModelParams& p, double omega) {
    const ComplexMatrix L = build_L(p, omega);
    return 2.0 * invert_numeric(L) - ComplexMatrix::Identity(4, 4);
}

}  // namespace pcopo
