#include "pcopo/correlations.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pcopo {

namespace {
const cplx I{0.0, 1.0};

struct SigmaCoeffs {
    // sigma as a quadratic in u = |S|^2: a*u^2 + b*u + c.
    double a, b, c;
};

SigmaCoeffs sigma_coeffs(const ModelParams& p) {
    const auto cc = coupling_constants(p);
    const cplx k = cc.kappa;
    const double c5 = 4.0 + p.M1 * p.M1;
    return {16.0 * std::norm(1.0 + k * k), -8.0 * (1.0 + std::norm(k)) * c5, c5 * c5};
}

// Vacuum two-frequency correlator of the input modes: ones at (1,4) and (2,3).
Eigen::Matrix4cd vacuum_N() {
    Eigen::Matrix4cd N = Eigen::Matrix4cd::Zero();
    N(0, 3) = 1.0;
    N(1, 2) = 1.0;
    return N;
}

MomentSet moments_from_matrix(const Eigen::Matrix4cd& M) {
    MomentSet r;
    r.n_plus = M(3, 0).real();
    r.n_minus = M(2, 1).real();
    r.anom_cross = M(0, 1);
    r.anom_plus = M(0, 0);
    r.anom_minus = M(1, 1);
    r.hop = M(2, 0);
    return r;
}
}  // namespace

double sigma_den(const ModelParams& p) {
    const auto sc = sigma_coeffs(p);
    const double u = std::norm(coupling_constants(p).S);
    return (sc.a * u + sc.b) * u + sc.c;
}

double threshold(const ModelParams& p, double e_max, double tol) {
    ModelParams q = p;
    q.E = 1.0;
    const auto sc = sigma_coeffs(q);
    const double s1 = std::norm(coupling_constants(q).S);  // |S|^2 at E = 1
    // sigma touches zero at the smaller root in u = |S|^2 without necessarily
    // changing sign (for M0 = 0 it is a perfect square), so bisect on the
    // monotone residual u(E) - u_root instead of sigma itself.
    const double disc = sc.b * sc.b - 4.0 * sc.a * sc.c;
    if (disc < 0.0)
        throw numerical_error("threshold: sigma_den has no real root");
    const double u_root = (-sc.b - std::sqrt(disc)) / (2.0 * sc.a);
    auto residual = [&](double E) { return E * E * s1 - u_root; };
    double lo = 0.0, hi = e_max;
    if (residual(hi) < 0.0)
        throw numerical_error("threshold: no root in the search window");
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (residual(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

bool below_threshold(const ModelParams& p) {
    return p.E < threshold(p);
}

double intensity(const ModelParams& p, double floor) {
    const auto cc = coupling_constants(p);
    const double s2 = std::norm(cc.S);
    const cplx k = cc.kappa;
    const double c5 = 4.0 + p.M1 * p.M1;
    const double sig = sigma_den(p);
    if (sig <= floor * c5 * c5)
        throw numerical_error("intensity: sigma_den at/below floor (threshold reached)");
    return -4.0 * s2 * (4.0 * s2 * std::norm(1.0 + k * k) - (1.0 + std::norm(k)) * c5) / sig;
}

double spectral_intensity(const ModelParams& p, double omega) {
    const Eigen::Matrix4cd T = transfer_matrix(p, omega);
    const Eigen::Matrix4cd Tm = transfer_matrix(p, -omega);
    const Eigen::Matrix4cd G = T * vacuum_N() * Tm.transpose();
    return G(3, 0).real();
}

double spectral_intensity_closed(const ModelParams& p, double omega) {
    const auto c = closed_inverse_parts(p, omega);
    const auto cm = closed_inverse_parts(p, -omega);
    const cplx num = cm.Wp * c.W - cm.Zp * c.Z;
    return (4.0 * num / (c.D * cm.D)).real();
}

MomentSet second_moments(const ModelParams& p, double floor) {
    const auto cc = coupling_constants(p);
    const cplx S = cc.S, k = cc.kappa;
    const double s2 = std::norm(S);
    const cplx c1 = 2.0 * s2 * (1.0 + k * k);
    const cplx c3 = s2 * (k - std::conj(k));
    const double c5 = 4.0 + p.M1 * p.M1;
    const cplx c6 = 2.0 + k * p.M1;
    const cplx c7 = 2.0 * k - p.M1;
    const double sig = sigma_den(p);
    if (sig <= floor * c5 * c5)
        throw numerical_error("second_moments: sigma_den at/below floor (threshold reached)");
    MomentSet r;
    r.n_plus = -4.0 * s2 * (4.0 * s2 * std::norm(1.0 + k * k) - (1.0 + std::norm(k)) * c5) / sig;
    r.n_minus = r.n_plus;
    r.hop = 4.0 * c3 * c5 / sig;
    r.anom_cross = 2.0 * S * (-2.0 * c1 * std::conj(c6) + c5 * c6) / sig;
    r.anom_plus = -2.0 * S * (2.0 * c1 * std::conj(c7) - c5 * c7) / sig;
    r.anom_minus = -r.anom_plus;
    return r;
}

MomentSet second_moments_lyapunov(const ModelParams& p) {
    const Eigen::Matrix4cd A = build_L(p, 0.0);
    // Solve A X + X A^T = N via the 16x16 Kronecker system.
    Eigen::Matrix4cd Id = Eigen::Matrix4cd::Identity();
    Eigen::MatrixXcd K(16, 16);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            K.block<4, 4>(4 * i, 4 * j) = Id(i, j) * A + A(i, j) * Id;
    const Eigen::Matrix4cd N = vacuum_N();
    Eigen::VectorXcd rhs(16);
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) rhs(4 * j + i) = N(i, j);
    const Eigen::VectorXcd x = K.partialPivLu().solve(rhs);
    Eigen::Matrix4cd X;
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) X(i, j) = x(4 * j + i);
    return moments_from_matrix(4.0 * X);  // output moments are 4X
}

MomentSet second_moments_quadrature(const ModelParams& p) {
    using boost::math::quadrature::gauss_kronrod;
    const Eigen::Matrix4cd N = vacuum_N();
    const std::array<std::pair<int, int>, 6> idx{{{3, 0}, {2, 1}, {0, 1}, {0, 0}, {1, 1}, {2, 0}}};
    Eigen::Matrix4cd M = Eigen::Matrix4cd::Zero();
    for (auto [i, j] : idx) {
        auto element = [&](double w) -> cplx {
            const Eigen::Matrix4cd G =
                transfer_matrix(p, w) * N * transfer_matrix(p, -w).transpose();
            return G(i, j);
        };
        const double re = gauss_kronrod<double, 31>::integrate(
            [&](double w) { return element(w).real(); }, -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), 10, 1e-10);
        const double im = gauss_kronrod<double, 31>::integrate(
            [&](double w) { return element(w).imag(); }, -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), 10, 1e-10);
        M(i, j) = cplx{re, im} / (2.0 * M_PI);
    }
    return moments_from_matrix(M);
}

VarianceParts variance_parts(const MomentSet& m, const QuadratureSpec& q) {
    VarianceParts v;
    v.x1x1 = 2.0 * std::real(m.anom_plus * std::exp(2.0 * I * q.theta)) + 2.0 * m.n_plus + 1.0;
    v.x2x2 = 2.0 * std::real(m.anom_minus * std::exp(2.0 * I * (q.theta + q.phi))) +
             2.0 * m.n_minus + 1.0;
    v.x1x2 = 2.0 * std::real(m.anom_cross * std::exp(I * (2.0 * q.theta + q.phi))) +
             2.0 * std::real(std::conj(m.hop) * std::exp(I * q.phi));
    return v;
}

double quadrature_variance(const MomentSet& m, const QuadratureSpec& q, double weight) {
    const auto v = variance_parts(m, q);
    return weight * weight * v.x1x1 + v.x2x2 / (weight * weight) + 2.0 * v.x1x2;
}

double quadrature_variance(const ModelParams& p, const QuadratureSpec& q, double weight) {
    return quadrature_variance(second_moments(p), q, weight);
}

namespace {
// Nelder-Mead on the angle plane; the landscapes here are smooth and periodic.
MinVarianceResult refine_min(const MomentSet& m, double th0, double ph0, double h) {
    auto f = [&](double th, double ph) { return quadrature_variance(m, {th, ph}, 1.0); };
    std::array<std::array<double, 2>, 3> s{{{th0, ph0}, {th0 + h, ph0}, {th0, ph0 + h}}};
    std::array<double, 3> fv{f(s[0][0], s[0][1]), f(s[1][0], s[1][1]), f(s[2][0], s[2][1])};
    for (int it = 0; it < 400; ++it) {
        std::array<int, 3> ord{0, 1, 2};
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        if (fv[ord[2]] - fv[ord[0]] < 1e-13) break;
        const int lo = ord[0], mid = ord[1], hi = ord[2];
        const double cx = 0.5 * (s[lo][0] + s[mid][0]), cy = 0.5 * (s[lo][1] + s[mid][1]);
        double rx = 2.0 * cx - s[hi][0], ry = 2.0 * cy - s[hi][1];
        double fr = f(rx, ry);
        if (fr < fv[lo]) {
            const double ex = 3.0 * cx - 2.0 * s[hi][0], ey = 3.0 * cy - 2.0 * s[hi][1];
            const double fe = f(ex, ey);
            if (fe < fr) { rx = ex; ry = ey; fr = fe; }
            s[hi] = {rx, ry}; fv[hi] = fr;
        } else if (fr < fv[mid]) {
            s[hi] = {rx, ry}; fv[hi] = fr;
        } else {
            const double kx = 0.5 * (cx + s[hi][0]), ky = 0.5 * (cy + s[hi][1]);
            const double fk = f(kx, ky);
            if (fk < fv[hi]) {
                s[hi] = {kx, ky}; fv[hi] = fk;
            } else {
                for (int i : {mid, hi}) {
                    s[i] = {0.5 * (s[i][0] + s[lo][0]), 0.5 * (s[i][1] + s[lo][1])};
                    fv[i] = f(s[i][0], s[i][1]);
                }
            }
        }
    }
    const int best =
        static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    double th = std::fmod(s[best][0], M_PI);
    double ph = std::fmod(s[best][1], 2.0 * M_PI);
    if (th < 0.0) th += M_PI;
    if (ph < 0.0) ph += 2.0 * M_PI;
    return {fv[best], th, ph};
}
}  // namespace

MinVarianceResult min_variance(const ModelParams& p, int n_theta, int n_phi) {
    const MomentSet m = second_moments(p);
    double best = std::numeric_limits<double>::infinity();
    double th0 = 0.0, ph0 = 0.0;
    const double dth = M_PI / n_theta, dph = 2.0 * M_PI / n_phi;
    for (int i = 0; i < n_theta; ++i) {
        for (int j = 0; j < n_phi; ++j) {
            const double v = quadrature_variance(m, {i * dth, j * dph}, 1.0);
            if (v < best - 1e-15) {  // ties keep the lexicographically smallest angles
                best = v;
                th0 = i * dth;
                ph0 = j * dph;
            }
        }
    }
    return refine_min(m, th0, ph0, 0.5 * dth);
}

EntanglementReport duan_criterion(const ModelParams& p, const QuadratureSpec& q, double weight,
                                  DuanBound bound) {
    if (weight == 0.0) throw validation_error("duan_criterion: weight must be nonzero");
    return [&](const MomentSet& m) {
        EntanglementReport r;
        r.duan_weight = weight;
        r.duan_sum = quadrature_variance(m, q, weight) +
                     quadrature_variance(m, {q.theta + M_PI / 2.0, q.phi + M_PI}, weight);
        const double w2 = weight * weight;
        r.duan_bound = bound == DuanBound::as_printed ? 2.0 * (w2 + 1.0 / std::abs(weight))
                                                      : 2.0 * (w2 + 1.0 / w2);
        r.entangled_duan = r.duan_sum < r.duan_bound;
        return r;
    }(second_moments(p));
}

namespace {
EntanglementReport reid_from_moments(const MomentSet& m, const QuadratureSpec& q) {
    EntanglementReport r;
    const auto a = variance_parts(m, q);
    const auto b = variance_parts(m, {q.theta + M_PI / 2.0, q.phi + M_PI});
    if (a.x2x2 <= 0.0 || b.x2x2 <= 0.0)
        throw numerical_error("reid_criterion: degenerate conditioning variance");
    r.reid_lambda = -a.x1x2 / a.x2x2;
    const double v1 = a.x1x1 - a.x1x2 * a.x1x2 / a.x2x2;
    const double v2 = b.x1x1 - b.x1x2 * b.x1x2 / b.x2x2;
    r.reid_product = v1 * v2;
    r.entangled_reid = r.reid_product < 1.0;
    return r;
}
}  // namespace

EntanglementReport reid_criterion(const ModelParams& p, const QuadratureSpec& q) {
    return reid_from_moments(second_moments(p), q);
}

EntanglementMap entanglement_map(const ModelParams& p, const std::vector<double>& theta_grid,
                                 const std::vector<double>& phi_grid) {
    if (theta_grid.empty() || phi_grid.empty())
        throw validation_error("entanglement_map: empty angle grid");
    const MomentSet m = second_moments(p);
    EntanglementMap map;
    map.theta = theta_grid;
    map.phi = phi_grid;
    map.cells.reserve(theta_grid.size() * phi_grid.size());
    int nd = 0, nr = 0;
    for (double th : theta_grid) {
        for (double ph : phi_grid) {
            EntanglementReport r = reid_from_moments(m, {th, ph});
            r.duan_weight = 1.0;
            r.duan_sum = quadrature_variance(m, {th, ph}, 1.0) +
                         quadrature_variance(m, {th + M_PI / 2.0, ph + M_PI}, 1.0);
            r.duan_bound = 4.0;
            r.entangled_duan = r.duan_sum < r.duan_bound;
            nd += r.entangled_duan;
            nr += r.entangled_reid;
            map.cells.push_back(r);
        }
    }
    const double total = static_cast<double>(map.cells.size());
    map.duan_area = nd / total;
    map.reid_area = nr / total;
    return map;
}

TwinBeamReport twin_beams(const ModelParams& p) {
    const MomentSet m = second_moments(p);
    TwinBeamReport r;
    // Gaussian-moment (Wick) expansion of the normally ordered variance of
    // N = n(kc) - n(-kc), with the <N>^2 term subtracted.
    r.raw_variance = m.n_plus * m.n_plus + m.n_minus * m.n_minus + std::norm(m.anom_plus) +
                     std::norm(m.anom_minus) - 2.0 * std::norm(m.anom_cross) -
                     2.0 * std::norm(m.hop);
    r.shot_noise = m.n_plus + m.n_minus;
    // Vacuum input (E = 0): both terms vanish and the ratio is undefined.
    r.normalized = r.shot_noise > 0.0 ? r.raw_variance / r.shot_noise
                                      : std::numeric_limits<double>::quiet_NaN();
    return r;
}

double twin_beams_m0zero_closed(double E, double M1) {
    const double m2 = M1 * M1;
    const double den = 4.0 - 4.0 * E * E + m2;
    return 8.0 * E * E * (4.0 * E * E + m2 - 4.0) / (den * den);
}

}  // namespace pcopo
