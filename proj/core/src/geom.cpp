#include "overdet/geom.hpp"

#include <cmath>
#include <random>

namespace overdet {

namespace {

Mat3 reflection_across_plane(const Vec3& n) {
    return Mat3::Identity() - 2.0 * n * n.transpose();
}

// Block-wise maps on C^2 = R^4 with coordinates (x1,y1,x2,y2).
Mat4 swap_blocks() {
    Mat4 s = Mat4::Zero();
    s(0, 2) = s(1, 3) = s(2, 0) = s(3, 1) = 1.0;
    return s;
}

// z2 -> e^{i a} conj(z2), first block fixed.
Mat4 conj_second(double a) {
    Mat4 s = Mat4::Identity();
    s(2, 2) = std::cos(a);
    s(2, 3) = std::sin(a);
    s(3, 2) = std::sin(a);
    s(3, 3) = -std::cos(a);
    return s;
}

// z1 -> e^{i a} conj(z1), second block fixed.
Mat4 conj_first(double a) {
    Mat4 s = Mat4::Identity();
    s(0, 0) = std::cos(a);
    s(0, 1) = std::sin(a);
    s(1, 0) = std::sin(a);
    s(1, 1) = -std::cos(a);
    return s;
}

}  // namespace

SymmetryConfig build_config(int m, int dimension) {
    if (m < 4) throw std::invalid_argument("build_config: m must be >= 4");
    if (m % 2 != 0)
        throw std::invalid_argument(
            "build_config: m must be even (the closed-form singular solutions "
            "require an antipodally symmetric configuration)");
    if (dimension != 2 && dimension != 3)
        throw std::invalid_argument("build_config: dimension must be 2 or 3");

    SymmetryConfig c;
    c.m = m;
    c.dimension = dimension;
    c.delta = 1.0 / (10.0 * m);

    if (dimension == 2) {
        c.L0.reserve(m);
        for (int k = 0; k < m; ++k) {
            double a = 2.0 * M_PI * k / m;
            c.L0.emplace_back(std::cos(a), std::sin(a), 0.0);
        }
        c.L2 = {Vec3(0, 0, 1), Vec3(0, 0, -1)};
        c.p0 = Vec3(1, 0, 0);
        c.p2 = Vec3(0, 0, 1);

        // Equatorial reflection, the meridian mirror through p0, and the
        // mid-point meridian mirror; these generate the full group (order 4m).
        c.generators3.push_back(reflection_across_plane(Vec3(0, 0, 1)));
        c.generators3.push_back(reflection_across_plane(Vec3(0, 1, 0)));
        double h = M_PI / m;
        c.generators3.push_back(
            reflection_across_plane(Vec3(-std::sin(h), std::cos(h), 0)));
    } else {
        c.L.reserve(static_cast<std::size_t>(m) * m);
        const double s = 1.0 / std::sqrt(2.0);
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k) {
                double a = 2.0 * M_PI * j / m, b = 2.0 * M_PI * k / m;
                c.L.emplace_back(s * std::cos(a), s * std::sin(a),
                                 s * std::cos(b), s * std::sin(b));
            }
        c.q0 = Vec4(s, 0, s, 0);
        c.generators4.push_back(swap_blocks());
        c.generators4.push_back(conj_second(0.0));
        c.generators4.push_back(conj_second(2.0 * M_PI / m));
        c.generators4.push_back(conj_first(0.0));
        c.generators4.push_back(conj_first(2.0 * M_PI / m));
    }
    return c;
}

namespace {
template <typename V>
double gdist(const V& p, const V& q) {
    if (std::abs(p.norm() - 1.0) > 1e-12 || std::abs(q.norm() - 1.0) > 1e-12)
        throw std::invalid_argument("geodesic_distance: inputs must be unit vectors");
    double h = (p - q).norm() / 2.0;
    if (h > 1.0) h = 1.0;
    return 2.0 * std::asin(h);
}
}  // namespace

double geodesic_distance(const Vec3& p, const Vec3& q) { return gdist(p, q); }
double geodesic_distance(const Vec4& p, const Vec4& q) { return gdist(p, q); }

namespace {
template <typename V>
std::pair<double, int> dset(const V& p, const std::vector<V>& set) {
    if (set.empty()) throw std::invalid_argument("dist_to_set: empty set");
    // Ties (up to rounding) keep the lowest index.
    const double tie = 1e-14;
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        double d = geodesic_distance(p, set[i]);
        if (d < best - tie) arg = static_cast<int>(i);
        if (d < best) best = d;
    }
    return {best, arg};
}
}  // namespace

std::pair<double, int> dist_to_set(const Vec3& p, const std::vector<Vec3>& set) {
    return dset(p, set);
}
std::pair<double, int> dist_to_set(const Vec4& p, const std::vector<Vec4>& set) {
    return dset(p, set);
}

namespace {
// f(x) = exp(-1/x) for x > 0, else 0; with first two derivatives.
Jet2 bump(double x) {
    Jet2 j;
    if (x <= 0.0) return j;
    double f = std::exp(-1.0 / x);
    j.f = f;
    j.df = f / (x * x);
    j.d2f = f * (1.0 - 2.0 * x) / (x * x * x * x);
    return j;
}
}  // namespace

Jet2 smooth_step(double s) {
    Jet2 out;
    if (s <= -1.0) return out;
    if (s >= 1.0) {
        out.f = 1.0;
        return out;
    }
    Jet2 g = bump(1.0 + s);   // G(s) = f(1+s)
    Jet2 h = bump(1.0 - s);   // H(s) = f(1-s), H' = -f'(1-s)
    double hp = -h.df, hpp = h.d2f;
    double den = g.f + h.f;
    double dnum = g.df * h.f - g.f * hp;
    out.f = g.f / den;
    out.df = dnum / (den * den);
    double d2num = g.d2f * h.f - g.f * hpp;
    out.d2f = (d2num * den - 2.0 * dnum * (g.df + hp)) / (den * den * den);
    return out;
}

double cutoff(double a, double b, double t) { return cutoff_jet(a, b, t).f; }

namespace {
// (1 + erf(kappa s / sqrt(1 - s^2)))/2: nondecreasing, exactly 0/1 outside
// [-1, 1], odd about 0.
Jet2 erf_step(double s) {
    Jet2 out;
    if (s <= -1.0) return out;
    if (s >= 1.0) {
        out.f = 1.0;
        return out;
    }
    const double kappa = 3.0;
    double q = 1.0 - s * s;
    double u = s / std::sqrt(q);
    double arg = kappa * u;
    if (arg > 8.0) {
        out.f = 1.0;
        return out;
    }
    if (arg < -8.0) return out;
    out.f = 0.5 * (1.0 + std::erf(arg));
    double up = std::pow(q, -1.5);
    double upp = 3.0 * s * std::pow(q, -2.5);
    double g = kappa / std::sqrt(M_PI) * std::exp(-arg * arg);
    out.df = g * up;
    out.d2f = g * (upp - 2.0 * kappa * kappa * u * up * up);
    return out;
}
}  // namespace

double cutoff_band(double a, double b, double t) { return cutoff_band_jet(a, b, t).f; }

Jet2 cutoff_band_jet(double a, double b, double t) {
    if (a == b) throw std::invalid_argument("cutoff_band: a == b");
    // affine map sending the whole of [a,b] to the transition [-1, 1]
    double lp = 2.0 / (b - a);
    double s = -1.0 + lp * (t - a);
    Jet2 j = erf_step(s);
    j.df *= lp;
    j.d2f *= lp * lp;
    return j;
}

Jet2 cutoff_jet(double a, double b, double t) {
    if (a == b) throw std::invalid_argument("cutoff: a == b");
    // Affine L with L(a) = -3, L(b) = 3.
    double lp = 6.0 / (b - a);
    double s = -3.0 + lp * (t - a);
    Jet2 j = smooth_step(s);
    j.df *= lp;
    j.d2f *= lp * lp;
    return j;
}

namespace {
template <typename V, typename M>
double check_sym_impl(const std::function<double(const V&)>& field,
                      const std::vector<M>& gens, int samples, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        V p;
        for (int k = 0; k < p.size(); ++k) p[k] = nd(rng);
        if (p.norm() < 1e-6) continue;
        p.normalize();
        double f = field(p);
        for (const auto& g : gens) {
            V q = (g * p).normalized();
            worst = std::max(worst, std::abs(field(q) - f));
        }
    }
    return worst;
}
}  // namespace

double check_symmetric(const std::function<double(const Vec3&)>& field,
                       const SymmetryConfig& config, int samples, unsigned seed) {
    if (config.dimension != 2)
        throw std::invalid_argument("check_symmetric: need a dimension-2 config");
    return check_sym_impl<Vec3, Mat3>(field, config.generators3, samples, seed);
}

double check_symmetric4(const std::function<double(const Vec4&)>& field,
                        const SymmetryConfig& config, int samples, unsigned seed) {
    if (config.dimension != 3)
        throw std::invalid_argument("check_symmetric4: need a dimension-3 config");
    return check_sym_impl<Vec4, Mat4>(field, config.generators4, samples, seed);
}

double pairwise_sum(const double* data, std::size_t n) {
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(data, h) + pairwise_sum(data + h, n - h);
}

double pairwise_sum(const std::vector<double>& v) {
    return pairwise_sum(v.data(), v.size());
}

}  // namespace overdet
