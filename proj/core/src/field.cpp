#include "overdet/field.hpp"

#include <cmath>

namespace overdet {

std::shared_ptr<const DiskGeometry> make_disk_geometry(const MatchingData& md) {
    auto geo = std::make_shared<DiskGeometry>();
    geo->md = md;
    const SymmetryConfig& c = md.config;
    for (const Vec3& q : c.L0) {
        DiskFrame f;
        f.center = q;
        f.e1 = Vec3(0, 0, 1);
        f.e2 = q.cross(f.e1);
        geo->family0.push_back(f);
    }
    for (const Vec3& q : c.L2) {
        DiskFrame f;
        f.center = q;
        f.e1 = Vec3(1, 0, 0);
        f.e2 = Vec3(0, 1, 0);
        geo->family1.push_back(f);
    }
    const double m = c.m;
    // the transition is widened beyond the nominal [1/(2m), 1/m] so that the
    // band residuals stay spectrally resolvable at the default truncation
    for (int f = 0; f < 2; ++f) {
        double tau = geo->tau(f);
        geo->band_in[f] = std::max(1.0 / (2.0 * m), 2.05 * tau);
        geo->band_out[f] = std::max(3.0 / m, 2.5 * tau);
    }
    return geo;
}

bool DiskGeometry::local_coords(int f, const Vec3& p, double& r, double& theta,
                                int& disk) const {
    return local_coords_within(f, p, band_out[f], r, theta, disk);
}

bool DiskGeometry::local_coords_within(int f, const Vec3& p, double radius,
                                       double& r, double& theta, int& disk) const {
    const auto& fr = frames(f);
    double best = 1e300;
    int arg = -1;
    for (std::size_t i = 0; i < fr.size(); ++i) {
        double d = geodesic_distance(p, fr[i].center);
        if (d < best) {
            best = d;
            arg = static_cast<int>(i);
        }
    }
    if (best >= radius) return false;
    r = best;
    disk = arg;
    const DiskFrame& d = fr[arg];
    Vec3 w = p - std::cos(r) * d.center;
    double s = std::sin(r);
    if (s < 1e-14) {
        theta = 0.0;
    } else {
        w /= s;
        theta = std::atan2(w.dot(d.e2), w.dot(d.e1));
    }
    return true;
}

Jet2 LocalLayer::bare_jet(double r) const {
    Jet2 j;
    switch (kind) {
        case ProfileKind::Flat: {
            double q = std::pow(flat_tau / r, k);
            j.f = q;
            j.df = -k * q / r;
            j.d2f = k * (k + 1.0) * q / (r * r);
            break;
        }
        case ProfileKind::ExactSingular:
            j = prof->eval(r);
            break;
        case ProfileKind::ExactPolarPair: {
            // regular-at-the-antipode solution reflected + the direct one:
            // T_k(pi - r) + T_k(r); exact, singular ~ r^{-k} at this pole only
            Jet2 a = prof2->eval(M_PI - r);
            Jet2 b = prof2->eval(r);
            j.f = a.f + b.f;
            j.df = -a.df + b.df;
            j.d2f = a.d2f + b.d2f;
            break;
        }
        case ProfileKind::Tabulated:
            if (hard_support && r >= tab->r_hi()) return Jet2{};
            j = tab->eval(r);
            break;
    }
    j.f /= norm;
    j.df /= norm;
    j.d2f /= norm;
    return j;
}

Jet2 LocalLayer::radial_jet(double r, const DiskGeometry& geo) const {
    if (hard_support && tab && r >= tab->r_hi()) return Jet2{};
    if (!global_support && banded && r >= geo.band_out[family]) return Jet2{};
    Jet2 R = bare_jet(r);
    if (global_support || !banded) return R;
    // 1 at band_in, 0 at band_out, erf transition across the whole band
    Jet2 psi = cutoff_band_jet(geo.band_out[family], geo.band_in[family], r);
    Jet2 out;
    out.f = psi.f * R.f;
    out.df = psi.df * R.f + psi.f * R.df;
    out.d2f = psi.d2f * R.f + 2.0 * psi.df * R.df + psi.f * R.d2f;
    return out;
}

Vec3 collar_point(const DiskGeometry& geo, int family, double z, double theta) {
    const DiskFrame& d = geo.representative(family);
    double r = geo.tau(family) - z;
    return std::cos(r) * d.center +
           std::sin(r) * (std::cos(theta) * d.e1 + std::sin(theta) * d.e2);
}

double ExteriorField::value(const Vec3& p) const {
    double acc = 0.0;
    if (phi2_coeff != 0.0) acc += phi2_coeff * phi2_eval(p).first;
    if (!corr.empty()) acc += eval_field(corr, p);
    for (const LocalLayer& L : layers) {
        double r, th;
        int disk;
        double radius = L.global_support ? M_PI : geo->band_out[L.family];
        if (!geo->local_coords_within(L.family, p, radius, r, th, disk)) continue;
        Jet2 R = L.radial_jet(r, *geo);
        acc += L.coeff * R.f * std::cos(L.k * th);
    }
    return acc;
}

std::pair<double, Vec3> ExteriorField::value_grad(const Vec3& p) const {
    double acc = 0.0;
    Vec3 grad = Vec3::Zero();
    if (phi2_coeff != 0.0) {
        auto [v, g] = phi2_eval(p);
        acc += phi2_coeff * v;
        grad += phi2_coeff * g;
    }
    if (!corr.empty()) {
        auto [v, g] = eval_field_grad(corr, p);
        acc += v;
        grad += g;
    }
    for (const LocalLayer& L : layers) {
        double r, th;
        int disk;
        double radius = L.global_support ? M_PI : geo->band_out[L.family];
        if (!geo->local_coords_within(L.family, p, radius, r, th, disk)) continue;
        const DiskFrame& d = geo->frames(L.family)[disk];
        Jet2 R = L.radial_jet(r, *geo);
        double ck = std::cos(L.k * th), sk = std::sin(L.k * th);
        Vec3 w = std::cos(th) * d.e1 + std::sin(th) * d.e2;
        Vec3 xr = -std::sin(r) * d.center + std::cos(r) * w;
        Vec3 wt = -std::sin(th) * d.e1 + std::cos(th) * d.e2;  // unit, |x_theta| = sin r
        acc += L.coeff * R.f * ck;
        grad += L.coeff * (R.df * ck * xr - R.f * L.k * sk / std::sin(r) * wt);
    }
    return {acc, grad};
}

ChartJets collar_chart_jets(const DiskGeometry& geo, int family, double z,
                            double theta) {
    ChartJets cj;
    double tau = geo.tau(family);
    double r = tau - z;
    if (family == 1) {
        // north polar chart: beta = r, lambda = theta
        cj.beta = r;
        cj.bz = -1.0;
        cj.lambda = theta;
        cj.lt = 1.0;
        return cj;
    }
    // equatorial representative at p0 = (1,0,0), e1 = north, e2 = (0,-1,0):
    // x = (cos r, -sin r sin t, sin r cos t)
    double sr = std::sin(r), cr = std::cos(r);
    double st = std::sin(theta), ct = std::cos(theta);
    // u = cos(beta) = x3 = sin r cos t; z-derivatives via dr/dz = -1
    double u = sr * ct;
    double uz = -cr * ct, ut = -sr * st;
    double uzz = -sr * ct, uzt = cr * st, utt = -sr * ct;
    double s2 = std::max(1e-300, 1.0 - u * u);
    double sb = std::sqrt(s2);
    double bu = -1.0 / sb;
    double buu = -u / (s2 * sb);
    cj.beta = std::acos(std::min(1.0, std::max(-1.0, u)));
    cj.bz = bu * uz;
    cj.bt = bu * ut;
    cj.bzz = buu * uz * uz + bu * uzz;
    cj.bzt = buu * uz * ut + bu * uzt;
    cj.btt = buu * ut * ut + bu * utt;
    // lambda = atan2(y, x1) with y = -sin r sin t, x1 = cos r
    double y = -sr * st, x1 = cr;
    double yz = cr * st, yt = -sr * ct;
    double yzz = sr * st, yzt = cr * ct, ytt = sr * st;
    double xz = sr, xzz = -cr;  // x1_z = sin r, x1_zz = -cos r, x1_t = 0
    double D = x1 * x1 + y * y;
    cj.lambda = std::atan2(y, x1);
    auto lam1 = [&](double ya, double xa) { return (x1 * ya - y * xa) / D; };
    cj.lz = lam1(yz, xz);
    cj.lt = lam1(yt, 0.0);
    auto lam2 = [&](double la, double ya, double xa, double yb, double xb,
                    double yab, double xab) {
        double Db = 2.0 * (x1 * xb + y * yb);
        return (xb * ya + x1 * yab - yb * xa - y * xab) / D - la * Db / D;
    };
    cj.lzz = lam2(cj.lz, yz, xz, yz, xz, yzz, xzz);
    cj.lzt = lam2(cj.lz, yz, xz, yt, 0.0, yzt, 0.0);
    cj.ltt = lam2(cj.lt, yt, 0.0, yt, 0.0, ytt, 0.0);
    return cj;
}

CollarJet compose_jet(const SphereJet& f, const ChartJets& c) {
    CollarJet o;
    o.u = f.f;
    o.uz = f.fb * c.bz + f.fl * c.lz;
    o.ut = f.fb * c.bt + f.fl * c.lt;
    o.uzz = f.fbb * c.bz * c.bz + 2.0 * f.fbl * c.bz * c.lz + f.fll * c.lz * c.lz +
            f.fb * c.bzz + f.fl * c.lzz;
    o.uzt = f.fbb * c.bz * c.bt + f.fbl * (c.bz * c.lt + c.bt * c.lz) +
            f.fll * c.lz * c.lt + f.fb * c.bzt + f.fl * c.lzt;
    o.utt = f.fbb * c.bt * c.bt + 2.0 * f.fbl * c.bt * c.lt + f.fll * c.lt * c.lt +
            f.fb * c.btt + f.fl * c.ltt;
    return o;
}

namespace {
// Jet of Phi2 on the collar chart through beta.
CollarJet phi2_collar(const DiskGeometry& geo, int family, double z, double theta) {
    ChartJets c = collar_chart_jets(geo, family, z, theta);
    Jet2 h = phi2_profile(c.beta);
    SphereJet f;
    f.f = h.f;
    f.fb = h.df;
    f.fbb = h.d2f;
    return compose_jet(f, c);
}
}  // namespace

CollarJet ExteriorField::collar_jet(int family, double z, double theta) const {
    CollarJet out;
    const double tau = geo->tau(family);
    const double r = tau - z;
    if (phi2_coeff != 0.0) {
        CollarJet p = phi2_collar(*geo, family, z, theta);
        out.u += phi2_coeff * p.u;
        out.uz += phi2_coeff * p.uz;
        out.ut += phi2_coeff * p.ut;
        out.uzz += phi2_coeff * p.uzz;
        out.uzt += phi2_coeff * p.uzt;
        out.utt += phi2_coeff * p.utt;
    }
    if (!corr.empty()) {
        ChartJets c = collar_chart_jets(*geo, family, z, theta);
        SphereJet f = eval_field_jet(corr, c.beta, c.lambda);
        CollarJet s = compose_jet(f, c);
        out.u += s.u;
        out.uz += s.uz;
        out.ut += s.ut;
        out.uzz += s.uzz;
        out.uzt += s.uzt;
        out.utt += s.utt;
    }
    for (const LocalLayer& L : layers) {
        if (L.family == family) {
            Jet2 R = L.radial_jet(r, *geo);
            if (R.f == 0.0 && R.df == 0.0 && R.d2f == 0.0) continue;
            double ck = std::cos(L.k * theta), sk = std::sin(L.k * theta);
            double c = L.coeff;
            out.u += c * R.f * ck;
            out.uz += -c * R.df * ck;
            out.ut += -c * R.f * L.k * sk;
            out.uzz += c * R.d2f * ck;
            out.uzt += c * R.df * L.k * sk;
            out.utt += -c * R.f * L.k * L.k * ck;
        } else if (L.global_support) {
            // exact global mode W(beta) cos(k lambda) seen from the other chart
            ChartJets c = collar_chart_jets(*geo, family, z, theta);
            Jet2 W = L.bare_jet(c.beta);
            double ck = std::cos(L.k * c.lambda), sk = std::sin(L.k * c.lambda);
            SphereJet f;
            f.f = W.f * ck;
            f.fb = W.df * ck;
            f.fl = -L.k * W.f * sk;
            f.fbb = W.d2f * ck;
            f.fbl = -L.k * W.df * sk;
            f.fll = -static_cast<double>(L.k) * L.k * W.f * ck;
            CollarJet s = compose_jet(f, c);
            out.u += L.coeff * s.u;
            out.uz += L.coeff * s.uz;
            out.ut += L.coeff * s.ut;
            out.uzz += L.coeff * s.uzz;
            out.uzt += L.coeff * s.uzt;
            out.utt += L.coeff * s.utt;
        }
        // other-family banded layers have disjoint support
    }
    return out;
}

double ExteriorField::lap_plus2(const Vec3& p) const {
    double acc = 0.0;
    if (!corr.empty()) acc += eval_field(apply_L(corr), p);
    for (const LocalLayer& L : layers) {
        double r, th;
        int disk;
        double radius = L.global_support ? M_PI : geo->band_out[L.family];
        if (!geo->local_coords_within(L.family, p, radius, r, th, disk)) continue;
        Jet2 R = L.radial_jet(r, *geo);
        double lr = R.d2f + std::cos(r) / std::sin(r) * R.df +
                    (2.0 - static_cast<double>(L.k) * L.k / (std::sin(r) * std::sin(r))) * R.f;
        acc += L.coeff * lr * std::cos(L.k * th);
    }
    // Phi2 contributes zero away from the poles.
    return acc;
}

void ExteriorField::axpy(double a, const ExteriorField& other) {
    if (!geo) geo = other.geo;
    phi2_coeff += a * other.phi2_coeff;
    if (!other.corr.empty()) {
        if (corr.empty()) {
            corr = other.corr;
            corr.scale(a);
        } else {
            corr.axpy(a, other.corr);
        }
    }
    for (const LocalLayer& L : other.layers) {
        bool merged = false;
        for (LocalLayer& mine : layers) {
            if (mine.family == L.family && mine.k == L.k && mine.kind == L.kind &&
                mine.prof == L.prof && mine.tab == L.tab &&
                mine.flat_tau == L.flat_tau && mine.norm == L.norm &&
                mine.banded == L.banded) {
                mine.coeff += a * L.coeff;
                merged = true;
                break;
            }
        }
        if (!merged) {
            layers.push_back(L);
            layers.back().coeff *= a;
        }
    }
}

void ExteriorField::scale(double a) {
    phi2_coeff *= a;
    corr.scale(a);
    for (LocalLayer& L : layers) L.coeff *= a;
}

}  // namespace overdet
