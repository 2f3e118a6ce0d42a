#include "overdet/ld2.hpp"

#include <cmath>

namespace overdet {

std::pair<double, double> green2(double r) {
    if (!(r > 0.0 && r < M_PI))
        throw std::invalid_argument("green2: r must lie in (0, pi)");
    if (r < 1e-4) {
        // G = cos(r) log(r) + (7/12) r^2 - (113/1440) r^4 + O(r^6 log r)
        double c = std::cos(r), s = std::sin(r), lr = std::log(r);
        double g = c * lr + (7.0 / 12.0) * r * r - (113.0 / 1440.0) * r * r * r * r;
        double dg = -s * lr + c / r + (7.0 / 6.0) * r - (113.0 / 360.0) * r * r * r;
        return {g, dg};
    }
    double c = std::cos(r), s = std::sin(r);
    double lt = std::log(2.0 * std::tan(r / 2.0));
    double g = c * lt + 1.0 - c;
    double dg = -s * lt + c / s + s;
    return {g, dg};
}

namespace {
// Tangential unit gradient of d_q at p (direction of increasing distance).
Vec3 grad_dist(const Vec3& p, const Vec3& q, double d) {
    double s = std::sin(d);
    if (s < 1e-14) return Vec3::Zero();
    return -(q - std::cos(d) * p) / s;
}
}  // namespace

std::pair<double, Vec3> phi0_eval(const SymmetryConfig& config, const Vec3& p) {
    if (config.dimension != 2)
        throw std::invalid_argument("phi0_eval: need a dimension-2 config");
    double val = 0.0;
    Vec3 grad = Vec3::Zero();
    for (const Vec3& q : config.L0) {
        double d = geodesic_distance(p, q);
        if (d < 1e-10)
            throw std::invalid_argument("phi0_eval: point too close to L0");
        auto [g, dg] = green2(d);
        val += 0.5 * g;
        grad += 0.5 * dg * grad_dist(p, q, d);
    }
    return {val, grad};
}

Jet2 phi2_profile(double d) {
    // f(d) = 1 + cos(d) log tan(d/2); even under d -> pi - d.
    Jet2 j;
    double c = std::cos(d), s = std::sin(d);
    double lt = std::log(std::tan(d / 2.0));
    j.f = 1.0 + c * lt;
    j.df = -s * lt + c / s;
    j.d2f = -c * lt - 1.0 - 1.0 / (s * s);
    return j;
}

std::pair<double, Vec3> phi2_eval(const Vec3& p) {
    double z = p.z();
    double d = std::acos(std::min(1.0, std::max(-1.0, std::abs(z))));
    if (d < 1e-10) throw std::invalid_argument("phi2_eval: point too close to L2");
    // Phi2 = h(beta) with beta = colatitude; h even about the equator.
    double beta = std::acos(std::min(1.0, std::max(-1.0, z)));
    Jet2 prof = phi2_profile(beta);  // valid on (0, pi), symmetric by identity
    double s = std::sin(beta);
    Vec3 ebeta = Vec3::Zero();
    if (s > 1e-14) {
        double lam = std::atan2(p.y(), p.x());
        ebeta = Vec3(std::cos(beta) * std::cos(lam), std::cos(beta) * std::sin(lam),
                     -s);
    }
    return {prof.f, prof.df * ebeta};
}

double phi0_prime_at_p0(const SymmetryConfig& config) {
    if (config.dimension != 2)
        throw std::invalid_argument("phi0_prime_at_p0: need a dimension-2 config");
    const int m = config.m;
    double sum = 0.0;
    for (int k = 1; k < m; ++k) {
        if (k == m / 2) continue;  // antipode of p0
        double a = 2.0 * M_PI * k / m;
        if (a > M_PI) a = 2.0 * M_PI - a;
        sum += green2(a).first;
    }
    return 1.0 - std::log(2.0) - std::log(static_cast<double>(m)) + 0.5 * sum;
}

MatchingData solve_matching(const SymmetryConfig& config) {
    const int m = config.m;
    const double P = phi0_prime_at_p0(config);
    // Ratio equation (from eliminating tau0, tau2):
    //   F(r) = m/2 - r^2 + r (log r + 1 - log(2m) - P) = 0.
    auto F = [&](double r) {
        return 0.5 * m - r * r + r * (std::log(r) + 1.0 - std::log(2.0 * m) - P);
    };
    double lo = 1e-8, hi = static_cast<double>(m);
    if (!(F(lo) > 0.0 && F(hi) < 0.0))
        throw std::runtime_error("solve_matching: root not bracketed in (0, m]");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (F(mid) > 0.0 ? lo : hi) = mid;
    }
    double r = 0.5 * (lo + hi);
    // Newton polish: F'(r) = -2r + log r + 2 - log(2m) - P
    for (int it = 0; it < 8; ++it) {
        double fp = -2.0 * r + std::log(r) + 2.0 - std::log(2.0 * m) - P;
        r -= F(r) / fp;
    }
    MatchingData md;
    md.config = config;
    md.r = r;
    md.tau2 = 2.0 * std::exp(-1.0 - 0.5 * m / r);
    md.tau0 = md.tau2 / r;
    md.zeta = std::sqrt(0.5 * m) - 0.25 * std::log(static_cast<double>(m)) - r;
    md.phi0_prime_p0 = P;

    // The primary equations are authoritative: verify both residuals.
    double e0 = md.tau0 * std::log(m * std::exp(P) * md.tau0) + md.tau2;
    double e2 = md.tau0 * 0.5 * m + md.tau2 * std::log(M_E * md.tau2 / 2.0);
    if (std::abs(e0) > 1e-12 * md.tau2 || std::abs(e2) > 1e-12 * md.tau2)
        throw std::runtime_error("solve_matching: matching residuals exceed tolerance");
    return md;
}

std::pair<double, Vec3> varphi_eval(const MatchingData& md, const Vec3& p) {
    auto [v0, g0] = phi0_eval(md.config, p);
    auto [v2, g2] = phi2_eval(p);
    return {md.tau0 * v0 + md.tau2 * v2, md.tau0 * g0 + md.tau2 * g2};
}

std::pair<double, double> mismatch_residual(const MatchingData& md, int n_radial,
                                            int n_angular) {
    const SymmetryConfig& c = md.config;
    double sup[2] = {0.0, 0.0};
    for (int family = 0; family < 2; ++family) {
        double tau = md.tau(family);
        Vec3 center = family == 0 ? c.p0 : c.p2;
        // orthonormal tangent frame at the center
        Vec3 e1 = family == 0 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
        Vec3 e2 = center.cross(e1);
        for (int i = 0; i < n_radial; ++i) {
            double d = tau * (0.5 + 1.5 * (i + 0.5) / n_radial);
            for (int j = 0; j < n_angular; ++j) {
                double th = 2.0 * M_PI * j / n_angular;
                Vec3 p = std::cos(d) * center +
                         std::sin(d) * (std::cos(th) * e1 + std::sin(th) * e2);
                double phi = varphi_eval(md, p).first;
                double dl = family == 0 ? dist_to_set(p, c.L0).first
                                        : dist_to_set(p, c.L2).first;
                sup[family] =
                    std::max(sup[family], std::abs(phi - tau * std::log(dl / tau)));
            }
        }
    }
    return {sup[0], sup[1]};
}

}  // namespace overdet
