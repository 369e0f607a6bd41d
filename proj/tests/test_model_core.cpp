#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "pcopo/correlations.hpp"
#include "pcopo/model_core.hpp"

using namespace pcopo;
using std::abs;

namespace {

ModelParams make(double E, double M0, double M1) {
    ModelParams p;
    p.E = E;
    p.M0 = M0;
    p.M1 = M1;
    return p;
}

ModelParams random_below_threshold(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p = make(0.0, u(rng), u(rng));
    p.E = 0.99 * threshold(p) * u(rng);
    return p;
}

}  // namespace

TEST_CASE("parameter defaults and validation") {
    ModelParams p;
    CHECK(p.delta1 == -1.0);
    CHECK(p.kc() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
    CHECK(p.kp() == doctest::Approx(2.0 * p.kc()).epsilon(1e-15));

    p.kp_explicit = 1.0;
    CHECK(p.kp() == 1.0);

    ModelParams bad;
    bad.E = -0.1;
    CHECK_THROWS_AS(bad.validate(), validation_error);
    bad = ModelParams{};
    bad.delta1 = 0.5;  // no pattern wavenumber
    CHECK_THROWS_AS(bad.validate(), validation_error);
}

TEST_CASE("pump steady state reproduces the three-harmonic solution") {
    const ModelParams p = make(0.92, 0.5, 0.0);
    const PumpSteadyState ss = pump_steady_state(p);
    CHECK(ss.a0_0.real() == doctest::Approx(0.895431).epsilon(1e-5));
    CHECK(ss.a0_0.imag() == doctest::Approx(0.043680).epsilon(1e-4));
    // odd harmonic pair is antisymmetric
    CHECK(abs(ss.a0_plus + ss.a0_minus) < 1e-14);
    // a0_plus = -(M0/2) a0_0 / dp with dp = 1 + i(delta0 + kp^2)
    const cplx dp = 1.0 + cplx{0.0, 1.0} * (p.delta0 + p.kp() * p.kp());
    CHECK(abs(ss.a0_plus + 0.5 * p.M0 * ss.a0_0 / dp) < 1e-14);
}

TEST_CASE("coupling constants: S is the homogeneous harmonic, kappa the sideband ratio") {
    const ModelParams p = make(0.92, 0.5, 0.0);
    const CouplingConstants cc = coupling_constants(p);
    const PumpSteadyState ss = pump_steady_state(p);
    CHECK(abs(cc.S - ss.a0_0) < 1e-15);
    CHECK(cc.kappa.real() == doctest::Approx(-0.05).epsilon(1e-12));
    CHECK(cc.kappa.imag() == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(abs(cc.kappa * cc.S - ss.a0_plus) < 1e-14);
    // kappa depends on M0 only (through the resonant kp)
    const CouplingConstants cc2 = coupling_constants(make(0.3, 0.5, 0.7));
    CHECK(abs(cc2.kappa - cc.kappa) < 1e-15);
}

TEST_CASE("fluctuation matrix structure") {
    const ModelParams p = make(0.8, 0.4, 0.3);
    const double w = 0.37;
    const CouplingConstants cc = coupling_constants(p);
    const ComplexMatrix L = build_L(p, w);
    const cplx a{1.0, -w};
    const double m = 0.5 * p.M1;
    CHECK(abs(L(0, 0) - a) < 1e-15);
    CHECK(abs(L(1, 1) - a) < 1e-15);
    CHECK(abs(L(2, 2) - a) < 1e-15);
    CHECK(abs(L(3, 3) - a) < 1e-15);
    CHECK(abs(L(0, 1) - m) < 1e-15);
    CHECK(abs(L(1, 0) + m) < 1e-15);
    CHECK(abs(L(0, 2) + cc.S) < 1e-15);
    CHECK(abs(L(0, 3) + cc.kappa * cc.S) < 1e-15);
    CHECK(abs(L(1, 2) - cc.kappa * cc.S) < 1e-15);
    CHECK(abs(L(1, 3) + cc.S) < 1e-15);
    // lower block is the conjugate channel
    CHECK(abs(L(2, 0) + std::conj(cc.S)) < 1e-15);
    CHECK(abs(L(2, 1) - std::conj(cc.kappa * cc.S)) < 1e-15);
    CHECK(abs(L(3, 0) + std::conj(cc.kappa * cc.S)) < 1e-15);
    CHECK(abs(L(3, 1) + std::conj(cc.S)) < 1e-15);
}

TEST_CASE("E = 0: matrix decouples and the inverse is elementary") {
    const ModelParams p = make(0.0, 0.6, 0.8);
    const double w = 1.3;
    const ComplexMatrix L = build_L(p, w);
    CHECK(abs(L(0, 2)) < 1e-15);
    CHECK(abs(L(0, 3)) < 1e-15);
    const ComplexMatrix inv = invert_L_closed(p, w);
    CHECK(invert_residual(L, inv) < 1e-12);
    // 2x2 rotation-like block inverts to (a^2+m^2)^-1 [[a, -m],[m, a]]
    const cplx a{1.0, -w};
    const double m = 0.5 * p.M1;
    const cplx den = a * a + m * m;
    CHECK(abs(inv(0, 0) - a / den) < 1e-13);
    CHECK(abs(inv(0, 1) + m / den) < 1e-13);
}

TEST_CASE("closed-form inverse against LU over random below-threshold draws") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uw(-5.0, 5.0);
    double worst = 0.0, worst_diff = 0.0;
    for (int i = 0; i < 300; ++i) {
        const ModelParams p = random_below_threshold(rng);
        const double w = uw(rng);
        const ComplexMatrix L = build_L(p, w);
        const ComplexMatrix closed = invert_L_closed(p, w);
        const ComplexMatrix numeric = invert_numeric(L);
        worst = std::max(worst, invert_residual(L, closed));
        worst_diff = std::max(worst_diff, (closed - numeric).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-10);
    CHECK(worst_diff < 1e-8);
}

TEST_CASE("closed inverse keeps the two-channel antisymmetry pattern") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uw(-3.0, 3.0);
    for (int i = 0; i < 50; ++i) {
        const ModelParams p = random_below_threshold(rng);
        const ComplexMatrix v = invert_L_closed(p, uw(rng));
        CHECK(abs(v(1, 0) + v(0, 1)) < 1e-12);
        CHECK(abs(v(1, 1) - v(0, 0)) < 1e-12);
        CHECK(abs(v(1, 2) + v(0, 3)) < 1e-12);
        CHECK(abs(v(1, 3) - v(0, 2)) < 1e-12);
        CHECK(abs(v(3, 0) + v(2, 1)) < 1e-12);
        CHECK(abs(v(3, 1) - v(2, 0)) < 1e-12);
        CHECK(abs(v(3, 2) + v(2, 3)) < 1e-12);
        CHECK(abs(v(3, 3) - v(2, 2)) < 1e-12);
    }
}

TEST_CASE("determinant at omega = 0 carries the intensity denominator") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 50; ++i) {
        const ModelParams p = random_below_threshold(rng);
        const cplx D = closed_D(p, 0.0);
        CHECK(abs(D - sigma_den(p) / 16.0) < 1e-10 * std::max(1.0, abs(D)));
    }
}

TEST_CASE("six-mode matrix restricted to +-kc reproduces the reduced matrix") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> uw(-2.0, 2.0);
    for (int i = 0; i < 20; ++i) {
        const ModelParams p = random_below_threshold(rng);
        const double w = uw(rng);
        const ComplexMatrix L6 = build_L6(p, p.kc(), w);
        const ComplexMatrix L = build_L(p, w);
        const int idx[4] = {0, 2, 3, 5};  // modes kc, kc-kp=-kc and conjugates
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                CHECK(abs(L6(idx[r], idx[c]) - L(r, c)) < 1e-12);
    }
}

TEST_CASE("six-mode matrix decouples without modulation") {
    ModelParams p = make(0.0, 0.0, 0.0);
    const ComplexMatrix L6 = build_L6(p, p.kc(), 0.4);
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
            const bool same = r == c || (r == 0 && c == 5) || (r == 5 && c == 0) ||
                              (r == 2 && c == 3) || (r == 3 && c == 2) || (r == 1 && c == 4) ||
                              (r == 4 && c == 1);
            if (!same) CHECK(abs(L6(r, c)) < 1e-15);
        }
}

TEST_CASE("transfer matrix is the identity in vacuum response magnitude at E = 0") {
    // With no pump coupling the cavity only phase-shifts the input.
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> uw(-4.0, 4.0), um(0.0, 1.0);
    for (int i = 0; i < 30; ++i) {
        ModelParams p = make(0.0, um(rng), um(rng));
        const ComplexMatrix T = transfer_matrix(p, uw(rng));
        const ComplexMatrix G = T * T.adjoint();
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                CHECK(abs(G(r, c) - (r == c ? 1.0 : 0.0)) < 1e-11);
    }
}

TEST_CASE("closed inverse is continuous in the M0 -> 0 limit") {
    const ModelParams p0 = make(0.7, 0.0, 0.4);
    ModelParams p1 = p0;
    p1.M0 = 1e-9;
    const double w = 0.8;
    const ComplexMatrix a = invert_L_closed(p0, w);
    const ComplexMatrix b = invert_L_closed(p1, w);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("numeric inversion refuses a singular system") {
    ComplexMatrix z = ComplexMatrix::Zero(4, 4);
    CHECK_THROWS_AS(invert_numeric(z), numerical_error);
    // exact rank deficiency: duplicate row
    ComplexMatrix L = build_L(make(0.8, 0.4, 0.3), 0.0);
    L.row(3) = L.row(0);
    CHECK_THROWS_AS(invert_numeric(L), numerical_error);
}
