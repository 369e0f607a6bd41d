#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>
#include <random>

#include "pcopo/correlations.hpp"

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

ModelParams at_relative(double r, double M0, double M1) {
    ModelParams p = make(0.0, M0, M1);
    p.E = r * threshold(p);
    return p;
}

ModelParams random_below_threshold(std::mt19937_64& rng, double max_rel = 0.95) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ModelParams p = make(0.0, u(rng), u(rng));
    p.E = max_rel * threshold(p) * u(rng);
    return p;
}

double rel_diff(double a, double b) { return abs(a - b) / std::max({abs(a), abs(b), 1e-30}); }

}  // namespace

TEST_CASE("OPO intensity matches E^2/(1-E^2)") {
    CHECK(intensity(make(0.92, 0.0, 0.0)) ==
          doctest::Approx(0.92 * 0.92 / (1.0 - 0.92 * 0.92)).epsilon(1e-10));
    // six-significant-figure value used throughout: 5.51042
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", intensity(make(0.92, 0.0, 0.0)));
    CHECK(std::string(buf) == "5.51042");
}

TEST_CASE("threshold: signal-modulation closed form and frozen pump-modulation values") {
    for (double M1 : {0.0, 0.25, 0.5, 1.0}) {
        const double expect = std::sqrt(1.0 + 0.25 * M1 * M1);
        CHECK(abs(threshold(make(0.0, 0.0, M1)) - expect) < 1e-6);
    }
    CHECK(abs(threshold(make(0.0, 0.0, 0.0)) - 1.0) < 1e-8);
    CHECK(threshold(make(0.0, 0.5, 0.0)) == doctest::Approx(0.931964).epsilon(1e-5));
    CHECK(threshold(make(0.0, 0.5, 0.5)) == doctest::Approx(0.960646).epsilon(1e-5));
    // sigma changes sign across the threshold (or touches zero for M0 = 0)
    const ModelParams p = make(0.0, 0.5, 0.3);
    const double thr = threshold(p);
    ModelParams lo = p, hi = p;
    lo.E = 0.999 * thr;
    hi.E = 1.001 * thr;
    CHECK(sigma_den(lo) > 0.0);
    CHECK(sigma_den(hi) < 0.0);
}

TEST_CASE("closed-form moments equal the Lyapunov solution") {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
        const ModelParams p = random_below_threshold(rng);
        const MomentSet a = second_moments(p);
        const MomentSet b = second_moments_lyapunov(p);
        const double scale = std::max(1.0, a.n_plus);
        CHECK(abs(a.n_plus - b.n_plus) < 1e-9 * scale);
        CHECK(abs(a.n_minus - b.n_minus) < 1e-9 * scale);
        CHECK(abs(a.anom_cross - b.anom_cross) < 1e-9 * scale);
        CHECK(abs(a.anom_plus - b.anom_plus) < 1e-9 * scale);
        CHECK(abs(a.anom_minus - b.anom_minus) < 1e-9 * scale);
        CHECK(abs(a.hop - b.hop) < 1e-9 * scale);
    }
}

TEST_CASE("moment identities: equal populations, opposite anomalous self terms") {
    std::mt19937_64 rng(29);
    for (int i = 0; i < 100; ++i) {
        const ModelParams p = random_below_threshold(rng);
        const MomentSet m = second_moments(p);
        CHECK(abs(m.n_plus - m.n_minus) < 1e-10 * std::max(1.0, m.n_plus));
        CHECK(abs(m.anom_plus + m.anom_minus) < 1e-10 * std::max(1.0, abs(m.anom_plus)));
        // hop vanishes without pump modulation
        if (p.M0 == 0.0) CHECK(abs(m.hop) < 1e-12);
    }
}

TEST_CASE("moments are physical: mode matrix PSD and anomalous bound") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 100; ++i) {
        const MomentSet m = second_moments(random_below_threshold(rng));
        // 2x2 normal-ordered population matrix [[n+, hop*],[hop, n-]] is PSD
        CHECK(m.n_plus >= -1e-12);
        CHECK(m.n_minus >= -1e-12);
        CHECK(m.n_plus * m.n_minus - std::norm(m.hop) >= -1e-10);
        // Cauchy-Schwarz with the commutator for <a a> terms
        CHECK(std::norm(m.anom_cross) <= (m.n_plus + 1.0) * (m.n_minus + 1.0) + 1e-10);
        CHECK(std::norm(m.anom_plus) <= m.n_plus * (m.n_plus + 1.0) + 1e-10);
    }
}

TEST_CASE("spectral intensity: matrix route equals closed route") {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> uw(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        const ModelParams p = random_below_threshold(rng);
        const double w = uw(rng);
        const double a = spectral_intensity(p, w);
        const double b = spectral_intensity_closed(p, w);
        CHECK(rel_diff(a, b) < 1e-9);
        CHECK(a >= -1e-12);
    }
}

TEST_CASE("spectral integral recovers the stationary intensity") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 10; ++i) {
        const ModelParams p = random_below_threshold(rng, 0.9);
        const MomentSet q = second_moments_quadrature(p);
        const double n_closed = intensity(p);
        CHECK(rel_diff(q.n_plus, n_closed) < 1e-6);
    }
}

TEST_CASE("quadrature of all spectra reproduces the six closed moments") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 10; ++i) {
        const ModelParams p = random_below_threshold(rng, 0.9);
        const MomentSet a = second_moments(p);
        const MomentSet q = second_moments_quadrature(p);
        const double scale = std::max(1.0, a.n_plus);
        CHECK(abs(a.n_plus - q.n_plus) < 1e-6 * scale);
        CHECK(abs(a.n_minus - q.n_minus) < 1e-6 * scale);
        CHECK(abs(a.anom_cross - q.anom_cross) < 1e-6 * scale);
        CHECK(abs(a.anom_plus - q.anom_plus) < 1e-6 * scale);
        CHECK(abs(a.anom_minus - q.anom_minus) < 1e-6 * scale);
        CHECK(abs(a.hop - q.hop) < 1e-6 * scale);
    }
}

TEST_CASE("spectral maximum: stays at omega = 0 for weak signal modulation") {
    // pump modulation alone cannot push the poles off zero
    for (double M0 : {0.0, 0.5, 0.9}) {
        ModelParams p = make(0.0, M0, 0.0);
        p.E = 0.98 * threshold(p);
        double best_w = 0.0, best = -1.0;
        for (int i = 0; i <= 800; ++i) {
            const double w = -4.0 + 8.0 * i / 800;
            const double v = spectral_intensity(p, w);
            if (v > best) {
                best = v;
                best_w = w;
            }
        }
        CHECK(abs(best_w) < 0.011);
    }
    // strong signal modulation splits the resonance
    ModelParams p = make(0.3, 0.0, 2.5);
    double best_w = 0.0, best = -1.0;
    for (int i = 0; i <= 1600; ++i) {
        const double w = -4.0 + 8.0 * i / 1600;
        const double v = spectral_intensity(p, w);
        if (v > best) {
            best = v;
            best_w = w;
        }
    }
    CHECK(abs(best_w) > 0.5);
}

TEST_CASE("variance of the OPO depends on angles only through 2*theta + phi") {
    const ModelParams p = at_relative(0.9, 0.0, 0.0);
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
    for (int i = 0; i < 30; ++i) {
        const double th = u(rng), ph = u(rng), d = u(rng);
        const double a = quadrature_variance(p, {th, ph});
        const double b = quadrature_variance(p, {th + d, ph - 2.0 * d});
        CHECK(abs(a - b) < 1e-10 * std::max(1.0, a));
    }
}

TEST_CASE("vacuum limits: variance 2, Duan sum 4, Reid product 1") {
    const ModelParams p = make(0.0, 0.5, 0.5);
    CHECK(abs(quadrature_variance(p, {0.3, 1.1}) - 2.0) < 1e-12);
    const EntanglementReport d = duan_criterion(p, {0.3, 1.1});
    CHECK(abs(d.duan_sum - 4.0) < 1e-12);
    CHECK(abs(d.duan_bound - 4.0) < 1e-12);
    CHECK_FALSE(d.entangled_duan);
    const EntanglementReport r = reid_criterion(p, {0.3, 1.1});
    CHECK(abs(r.reid_product - 1.0) < 1e-12);
    CHECK_FALSE(r.entangled_reid);
}

TEST_CASE("Duan bound conventions coincide at weight 1 and differ otherwise") {
    const ModelParams p = at_relative(0.95, 0.0, 0.0);
    const QuadratureSpec q{0.0, M_PI};
    const auto printed = duan_criterion(p, q, 1.0, DuanBound::as_printed);
    const auto standard = duan_criterion(p, q, 1.0, DuanBound::standard);
    CHECK(printed.duan_bound == doctest::Approx(4.0));
    CHECK(standard.duan_bound == doctest::Approx(4.0));
    const auto printed2 = duan_criterion(p, q, 1.5, DuanBound::as_printed);
    const auto standard2 = duan_criterion(p, q, 1.5, DuanBound::standard);
    CHECK(printed2.duan_bound == doctest::Approx(2.0 * (2.25 + 1.0 / 1.5)));
    CHECK(standard2.duan_bound == doctest::Approx(2.0 * (2.25 + 1.0 / 2.25)));
}

TEST_CASE("minimum variance: OPO value 2(1-r)/(1+r) and monotone in pump") {
    const double r = 0.95;
    const MinVarianceResult mv = min_variance(at_relative(r, 0.0, 0.0));
    CHECK(mv.value == doctest::Approx(2.0 * (1.0 - r) / (1.0 + r)).epsilon(1e-8));
    double prev = 2.0;
    for (double rr : {0.5, 0.7, 0.9, 0.97}) {
        const double v = min_variance(at_relative(rr, 0.0, 0.0)).value;
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("minimum variance is the same across the four modulation configurations") {
    const double r = 0.95;
    const double v0 = min_variance(at_relative(r, 0.0, 0.0)).value;
    for (auto [M0, M1] : {std::pair{0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}}) {
        const double v = min_variance(at_relative(r, M0, M1)).value;
        CHECK(rel_diff(v, v0) < 1e-6);
    }
}

TEST_CASE("entanglement map: nonempty regions below threshold, Reid region widens with M1") {
    std::vector<double> tg(61), pg(121);
    for (int i = 0; i < 61; ++i) tg[i] = M_PI * i / 60;
    for (int i = 0; i < 121; ++i) pg[i] = 2.0 * M_PI * i / 120;
    const EntanglementMap opo = entanglement_map(at_relative(0.95, 0.0, 0.0), tg, pg);
    CHECK(opo.duan_area > 0.0);
    CHECK(opo.reid_area > 0.0);
    // weight-1 Duan region of the OPO is {cos(2 theta + phi) < -E}: area acos(E)/pi
    CHECK(abs(opo.duan_area - std::acos(0.95) / M_PI) < 0.02);
    const EntanglementMap pc = entanglement_map(at_relative(0.95, 0.0, 0.5), tg, pg);
    CHECK(pc.reid_area > opo.reid_area);
}

TEST_CASE("twin beams: perfect anticorrelation without modulation") {
    for (double E : {0.5, 0.9, 0.99}) {
        const TwinBeamReport tb = twin_beams(make(E, 0.0, 0.0));
        CHECK(abs(tb.normalized + 1.0) < 1e-9);
    }
}

TEST_CASE("twin beams: assembled variance equals the closed M0 = 0 expression") {
    for (double M1 : {0.1, 0.4, 0.8, 1.2}) {
        for (double rel : {0.3, 0.7, 0.95}) {
            const ModelParams p = at_relative(rel, 0.0, M1);
            const TwinBeamReport tb = twin_beams(p);
            const double closed = twin_beams_m0zero_closed(p.E, M1);
            CHECK(abs(tb.raw_variance - closed) < 1e-9 * std::max(1.0, abs(closed)));
        }
    }
}

TEST_CASE("twin beams: sign boundary sits on M1^2 = 4(1 - E^2)") {
    for (double E : {0.6, 0.8, 0.9}) {
        const double m_star = 2.0 * std::sqrt(1.0 - E * E);
        // bisect the normalized variance in M1 at fixed E
        double lo = 1e-3, hi = std::min(1.999, 2.0 * m_star);
        REQUIRE(twin_beams(make(E, 0.0, lo)).normalized < 0.0);
        REQUIRE(twin_beams(make(E, 0.0, hi)).normalized > 0.0);
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (twin_beams(make(E, 0.0, mid)).normalized < 0.0 ? lo : hi) = mid;
        }
        CHECK(abs(0.5 * (lo + hi) - m_star) < 1e-6);
    }
}

TEST_CASE("twin beams with pump modulation stay normalized above -1") {
    std::mt19937_64 rng(53);
    for (int i = 0; i < 50; ++i) {
        ModelParams p = random_below_threshold(rng);
        if (p.E == 0.0) continue;
        const TwinBeamReport tb = twin_beams(p);
        CHECK(tb.normalized >= -1.0 - 1e-9);
        CHECK(tb.shot_noise > 0.0);
    }
}
