#include "overdet/dim4.hpp"

#include <cmath>

namespace overdet {

std::pair<double, double> green3(double r) {
    if (!(r > 0.0 && r < M_PI))
        throw std::invalid_argument("green3: r must lie in (0, pi)");
    if (r < 1e-4) {
        // G = -1/r + (11/6) r - (127/360) r^3 + O(r^5)
        double g = -1.0 / r + (11.0 / 6.0) * r - (127.0 / 360.0) * r * r * r;
        double dg = 1.0 / (r * r) + 11.0 / 6.0 - (127.0 / 120.0) * r * r;
        return {g, dg};
    }
    double s = std::sin(r), c2 = std::cos(2.0 * r);
    double g = -c2 / s;
    double dg = 2.0 * std::sin(2.0 * r) / s + c2 * std::cos(r) / (s * s);
    return {g, dg};
}

double ShootingResult::eval(double zq) const {
    // samples are descending in z; locate the bracketing pair
    if (z.size() < 2) throw std::runtime_error("ShootingResult: empty table");
    if (zq > z.front() || zq < z.back())
        throw std::invalid_argument("ShootingResult::eval: z out of range");
    std::size_t lo = 0, hi = z.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        (z[mid] >= zq ? lo : hi) = mid;
    }
    double h = z[hi] - z[lo];
    double t = (zq - z[lo]) / h;
    double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * phi[lo] + h10 * h * dphi[lo] + h01 * phi[hi] + h11 * h * dphi[hi];
}

double ShootingResult::eval_deriv(double zq) const {
    if (zq > z.front() || zq < z.back())
        throw std::invalid_argument("ShootingResult::eval_deriv: z out of range");
    std::size_t lo = 0, hi = z.size() - 1;
    while (hi - lo > 1) {
        std::size_t mid = (lo + hi) / 2;
        (z[mid] >= zq ? lo : hi) = mid;
    }
    double h = z[hi] - z[lo];
    double t = (zq - z[lo]) / h;
    double g00 = 6 * t * (t - 1) / h, g10 = (1 - 4 * t + 3 * t * t);
    double g01 = -6 * t * (t - 1) / h, g11 = t * (3 * t - 2);
    return g00 * phi[lo] + g10 * dphi[lo] + g01 * phi[hi] + g11 * dphi[hi];
}

namespace {

// Frobenius series at s = pi/4 - z: phi = sum c_n s^{2n}, built from the
// recurrence for phi_ss + 2 cot(2s) phi_s + 3 phi = 0.
struct FrobeniusStart {
    std::vector<double> c;
    std::pair<double, double> eval(double s) const {
        double f = 0, df = 0;
        for (std::size_t n2 = c.size(); n2-- > 0;) {
            // accumulate backwards: f = sum c_n s^{2n}
            f = f * s * s + c[n2];
        }
        for (std::size_t n = 1; n < c.size(); ++n)
            df += 2.0 * n * c[n] * std::pow(s, 2.0 * n - 1.0);
        return {f, df};
    }
};

FrobeniusStart frobenius_series(int nterms) {
    // 2 cot(2s) = 1/s - sum_{j>=1} a_j s^{2j-1};  a_1 = 4/3, a_2 = 16/45,
    // a_3 = 128/945, a_4 = 256/4725, ... (a_j = 2^{4j} |B_{2j}| / (2j)!)
    std::vector<double> a = {4.0 / 3.0, 16.0 / 45.0, 128.0 / 945.0, 256.0 / 4725.0,
                             1.0 / 93555.0 * 2048.0 * 4.0};
    // the 5th coefficient: 2^{20} |B_10|/10! = 1048576*(5/66)/3628800
    a[4] = 1048576.0 * (5.0 / 66.0) / 3628800.0;
    std::vector<double> c = {1.0};
    // plug phi = sum c_n s^{2n}: the s^{2n-2} coefficient of
    // phi'' + (1/s - sum a_j s^{2j-1}) phi' + 3 phi = 0 gives
    // (2n)^2 c_n = -3 c_{n-1} + sum_{j=1}^{n-1} a_j (2(n-j)) c_{n-j}
    for (int n = 1; n < nterms; ++n) {
        double rhs = -3.0 * c[n - 1];
        for (int j = 1; j <= n - 1 && j <= static_cast<int>(a.size()); ++j)
            rhs += a[j - 1] * 2.0 * (n - j) * c[n - j];
        c.push_back(rhs / (4.0 * n * n));
    }
    FrobeniusStart fs;
    fs.c = std::move(c);
    return fs;
}

struct OdeState {
    double phi, dphi;
};

OdeState rk4_step(double z, const OdeState& y, double h) {
    auto f = [](double zz, const OdeState& s) {
        return OdeState{s.dphi, 2.0 * std::tan(2.0 * zz) * s.dphi - 3.0 * s.phi};
    };
    OdeState k1 = f(z, y);
    OdeState k2 = f(z + h / 2, {y.phi + h / 2 * k1.phi, y.dphi + h / 2 * k1.dphi});
    OdeState k3 = f(z + h / 2, {y.phi + h / 2 * k2.phi, y.dphi + h / 2 * k2.dphi});
    OdeState k4 = f(z + h, {y.phi + h * k3.phi, y.dphi + h * k3.dphi});
    return {y.phi + h / 6 * (k1.phi + 2 * k2.phi + 2 * k3.phi + k4.phi),
            y.dphi + h / 6 * (k1.dphi + 2 * k2.dphi + 2 * k3.dphi + k4.dphi)};
}

ShootingResult integrate_from(double eps) {
    FrobeniusStart fs = frobenius_series(8);
    ShootingResult res;
    res.eps = eps;
    double z0 = M_PI / 4.0 - eps;
    auto [f0, dfs] = fs.eval(eps);
    // phi_z = -phi_s
    OdeState y{f0, -dfs};
    const double z_end = -M_PI / 4.0 + 5e-3;
    const int nsteps = 60000;
    const double h = (z_end - z0) / nsteps;
    double phi0 = 0, dphi0 = 0;
    res.z.reserve(nsteps / 4 + 2);
    res.phi.reserve(nsteps / 4 + 2);
    res.dphi.reserve(nsteps / 4 + 2);
    double z = z0;
    res.z.push_back(z);
    res.phi.push_back(y.phi);
    res.dphi.push_back(y.dphi);
    bool crossed = false;
    for (int i = 0; i < nsteps; ++i) {
        double znew = z0 + (i + 1) * h;
        if (!crossed && z > 0.0 && znew <= 0.0) {
            // land exactly on z = 0
            OdeState y0 = y;
            double hh = 0.0 - z;
            y0 = rk4_step(z, y0, hh);
            phi0 = y0.phi;
            dphi0 = y0.dphi;
            crossed = true;
        }
        y = rk4_step(z, y, znew - z);
        z = znew;
        if (i % 4 == 3) {
            res.z.push_back(z);
            res.phi.push_back(y.phi);
            res.dphi.push_back(y.dphi);
        }
    }
    if (!crossed) throw std::runtime_error("shoot_F: did not reach z = 0");
    res.F = dphi0 / phi0;
    for (std::size_t i = 0; i < res.phi.size(); ++i) {
        res.phi[i] /= phi0;
        res.dphi[i] /= phi0;
    }
    return res;
}

}  // namespace

ShootingResult shoot_F(double tol) {
    if (!(tol > 0)) throw std::invalid_argument("shoot_F: tol must be positive");
    double eps = 1e-2;
    ShootingResult prev = integrate_from(eps);
    for (int it = 0; it < 12; ++it) {
        eps /= 2.0;
        ShootingResult next = integrate_from(eps);
        if (std::abs(next.F - prev.F) < tol) return next;
        prev = next;
    }
    throw std::runtime_error("shoot_F: eps-refinement did not converge");
}

double phi3_eval(const SymmetryConfig& config, const Vec4& p) {
    if (config.dimension != 3)
        throw std::invalid_argument("phi3_eval: need a dimension-3 config");
    double acc = 0.0;
    for (const Vec4& q : config.L) {
        double d = geodesic_distance(p, q);
        if (d < 1e-9 || d > M_PI - 1e-9)
            throw std::invalid_argument("phi3_eval: point too close to the lattice");
        acc += 0.5 * green3(d).first;
    }
    return acc;
}

Tau4Result tau4(int m, const ShootingResult& shoot) {
    SymmetryConfig cfg = build_config(m, 3);
    const Vec4& p0 = cfg.q0;
    double sum = 0.0;
    for (const Vec4& q : cfg.L) {
        double dot = p0.dot(q);
        if (std::abs(dot) > 1.0 - 1e-12) continue;  // p0 and its antipode
        sum += 0.5 * green3(geodesic_distance(p0, q)).first;
    }
    Tau4Result out;
    out.F = shoot.F;
    double avg_coeff = m * m / (M_PI * shoot.F);
    out.phi3_prime_p0 = sum - avg_coeff;
    double denom = avg_coeff + out.phi3_prime_p0;
    if (denom <= 0.0) throw std::runtime_error("tau4: non-positive denominator");
    out.tau = 1.0 / denom;
    return out;
}

}  // namespace overdet
