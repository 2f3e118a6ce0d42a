#include "overdet/perturb.hpp"

#include <cmath>

namespace overdet {

Jet2 collar_psi(double tau, double z) {
    // cutoff(tau/3, tau/6; |z|): 1 for |z| <= 2 tau/9, 0 for |z| >= 5 tau/18
    double a = std::abs(z);
    Jet2 j = cutoff_jet(tau / 3.0, tau / 6.0, a);
    if (z < 0) j.df = -j.df;
    return j;
}

CollarMetric collar_metric(const MatchingData& md, int family,
                           const BoundaryFunction& v, double z, double theta) {
    CollarMetric cm;
    cm.tau = family == 0 ? md.tau0 : md.tau2;
    Jet2 vv = v.eval_jet(family, theta);
    cm.v = vv.f;
    cm.vp = vv.df;
    cm.vpp = vv.d2f;
    Jet2 ps = collar_psi(cm.tau, z);
    cm.psi = ps.f;
    cm.psip = ps.df;
    cm.psipp = ps.d2f;
    cm.Z = z + cm.psi * cm.v;
    cm.P = 1.0 + cm.psip * cm.v;
    cm.S = std::sin(cm.tau - cm.Z);
    cm.C = std::cos(cm.tau - cm.Z);
    double pv = cm.psi * cm.vp;
    cm.g_zz = cm.P * cm.P;
    cm.g_zt = cm.P * pv;
    cm.g_tt = pv * pv + cm.S * cm.S;
    cm.det = cm.P * cm.P * cm.S * cm.S;
    return cm;
}

double laplace_gv(const CollarMetric& cm, const CollarJet& u) {
    const double P = cm.P, S = cm.S, C = cm.C;
    const double psi = cm.psi, psip = cm.psip, psipp = cm.psipp;
    const double v = cm.v, vp = cm.vp, vpp = cm.vpp;
    const double pv = psi * vp;
    // derivatives of the building blocks
    const double Pz = psipp * v, Pt = psip * vp;
    const double Sz = -C * P;        // d/dz sin(tau - Z), Z_z = P
    const double St = -C * pv;       // Z_t = psi v'
    // A1 = (pv^2 + S^2)/(P S); A2 = pv/S; A3 = P/S
    const double A1 = (pv * pv + S * S) / (P * S);
    const double A1z =
        (2.0 * psip * vp * pv + 2.0 * S * Sz) / (P * S) - A1 * (Pz / P + Sz / S);
    const double A2 = pv / S;
    const double A2z = psip * vp / S - pv * Sz / (S * S);
    const double A2t = psi * vpp / S - pv * St / (S * S);
    const double A3 = P / S;
    const double A3t = Pt / S - P * St / (S * S);
    double div = A1 * u.uzz - 2.0 * A2 * u.uzt + A3 * u.utt +
                 (A1z - A2t) * u.uz + (A3t - A2z) * u.ut;
    return div / (P * S);
}

double laplace_g0(double tau, double z, const CollarJet& u) {
    double S = std::sin(tau - z), C = std::cos(tau - z);
    return u.uzz - (C / S) * u.uz + u.utt / (S * S);
}

Vec3 displace(const std::shared_ptr<const DiskGeometry>& geo,
              const BoundaryFunction& v, const Vec3& p) {
    // find the governing family/disk
    double best = 1e300;
    int fam = -1, disk = -1;
    double r = 0, th = 0;
    for (int f = 0; f < 2; ++f) {
        double rr, tt;
        int dd;
        int family = f;
        if (!geo->local_coords(family, p, rr, tt, dd)) continue;
        if (rr < best) {
            best = rr;
            fam = family;
            disk = dd;
            r = rr;
            th = tt;
        }
    }
    if (fam < 0) return p;
    double tau = geo->tau(fam);
    double dist_boundary = std::abs(r - tau);
    // Psi[0, 1/2; d_dD/tau](v, 0): full displacement at the boundary, none
    // beyond d_dD = tau/2 (transition in the middle third)
    double amp = cutoff(0.5, 0.0, dist_boundary / tau);
    if (amp == 0.0) return p;
    double vv = v.eval(fam, th);
    double step = amp * vv;  // flow toward the center by step
    if (step == 0.0) return p;
    const DiskFrame& d = geo->frames(fam)[disk];
    double rnew = r - step;
    Vec3 w = (p - std::cos(r) * d.center) / std::sin(r);
    return std::cos(rnew) * d.center + std::sin(rnew) * w;
}

NormalData normal_vector(const MatchingData& md, int family,
                         const BoundaryFunction& v, double theta) {
    NormalData nd;
    double tau = family == 0 ? md.tau0 : md.tau2;
    Jet2 vv = v.eval_jet(family, theta);
    double S = std::sin(tau - vv.f);
    double q = vv.df * vv.df + S * S;
    // nu_v = (g^{zz} d_z + g^{zt} d_t)/|dz|; at z = 0: g^{zz} = q/S^2,
    // g^{zt} = -v'/S^2, |dz| = sqrt(q)/S
    nd.nz = std::sqrt(q) / S;
    nd.ntheta = -vv.df / (S * std::sqrt(q));
    nd.cos_angle = S / std::sqrt(q);
    return nd;
}

namespace {

// varphi value and chart partials at the point x(Z, theta) of the family's
// representative collar chart.
struct VarphiChart {
    double val = 0, dZ = 0, dT = 0;
};

VarphiChart varphi_chart(const OperatorContext& ctx, int family, double Z,
                         double theta) {
    const auto& geo = *ctx.geometry();
    Vec3 p = collar_point(geo, family, Z, theta);
    auto [val, grad] = varphi_eval(ctx.matching(), p);
    const DiskFrame& d = geo.representative(family);
    double r = geo.tau(family) - Z;
    Vec3 w = std::cos(theta) * d.e1 + std::sin(theta) * d.e2;
    Vec3 wt = -std::sin(theta) * d.e1 + std::cos(theta) * d.e2;
    Vec3 xr = -std::sin(r) * d.center + std::cos(r) * w;
    VarphiChart out;
    out.val = val;
    out.dZ = grad.dot(-xr);               // d/dZ with r = tau - Z
    out.dT = grad.dot(std::sin(r) * wt);  // d/dtheta
    return out;
}

}  // namespace

CollarSource metric_difference_source(const OperatorContext& ctx,
                                      const BoundaryFunction& v,
                                      const std::vector<CollarJet> jets[2]) {
    CollarSource src;
    const MatchingData& md = ctx.matching();
    const int nt = ctx.n_theta_collar();
    for (int f = 0; f < 2; ++f) {
        int family = f;
        double tau = f == 0 ? md.tau0 : md.tau2;
        const auto& rs = ctx.collar_r(f);
        src.vals[f].assign(rs.size() * nt, 0.0);
        for (std::size_t ir = 0; ir < rs.size(); ++ir) {
            double z = tau - rs[ir];
            for (int it = 0; it < nt; ++it) {
                double th = ctx.collar_theta(it);
                const CollarJet& u = jets[f][ir * nt + it];
                CollarMetric cm = collar_metric(md, family, v, z, th);
                if (cm.psi == 0.0 && cm.psip == 0.0) continue;  // metrics agree
                double d = laplace_g0(tau, z, u) - laplace_gv(cm, u);
                src.vals[f][ir * nt + it] = tau * tau * d;  // (L-hat - L-hat_v) u
            }
        }
    }
    return src;
}

Candidate assemble_phi_v(const OperatorContext& ctx, const BoundaryFunction& v) {
    const MatchingData& md = ctx.matching();
    if (v.norm() >= md.tau2 * md.tau2)
        throw std::invalid_argument("assemble_phi_v: ||v|| must be < tau2^2");
    Candidate cand;
    cand.v = v;

    // trace of the pulled-back singular solution on the displaced circles
    const int ntc = ctx.params().n_theta_circle;
    std::vector<double> s0(ntc), s2(ntc);
    for (int j = 0; j < ntc; ++j) {
        double th = 2.0 * M_PI * j / ntc;
        s0[j] = varphi_chart(ctx, 0, v.eval(0, th), th).val;
        s2[j] = varphi_chart(ctx, 1, v.eval(1, th), th).val;
    }
    cand.varphi_trace = bf_from_samples(md, s0, s2, ctx.params().K0,
                                        ctx.params().K2, false, nullptr);

    cand.xi = ctx.h_L(cand.varphi_trace.osc());

    // xi~ via the Neumann series for J_{L_v}
    CollarSource E = metric_difference_source(ctx, v, cand.xi.jets);
    cand.xi_tilde = ExteriorField(ctx.geometry());
    double sup0 = 0.0;
    for (int f = 0; f < 2; ++f)
        for (double x : E.vals[f]) sup0 = std::max(sup0, std::abs(x));
    if (sup0 < 1e-14) sup0 = 0.0;  // v = 0 up to roundoff
    double sup_prev = sup0;
    int terms = 0;
    while (sup_prev > 0.0 && terms < 20) {
        OperatorContext::JSolve js = ctx.j_L(E);
        cand.xi_tilde.axpy(1.0, js.field);
        ++terms;
        E = metric_difference_source(ctx, v, js.jets);
        double sup = 0.0;
        for (int f = 0; f < 2; ++f)
            for (double x : E.vals[f]) sup = std::max(sup, std::abs(x));
        if (sup <= 1e-12 * sup0 || sup == 0.0) {
            cand.neumann_tail = sup;
            break;
        }
        if (sup >= 0.9 * sup_prev)
            throw std::runtime_error(
                "assemble_phi_v: Neumann series for the perturbed solve is not "
                "contracting");
        sup_prev = sup;
        cand.neumann_tail = sup;
    }
    cand.neumann_terms = terms;

    cand.xi_tilde_trace = ctx.trace_bf(cand.xi_tilde);
    BoundaryFunction tr = cand.varphi_trace;
    tr.axpy(-1.0, cand.xi.trace);
    tr.axpy(-1.0, cand.xi_tilde_trace);
    cand.trace_avg = tr.avg();
    cand.trace_osc_sup = tr.osc().sup_value();
    return cand;
}

namespace {
// boundary average of phi_{w+c} with the perturbed-metric correction frozen
// at a previously assembled candidate (its c-dependence is second order)
double frozen_trace_avg(const OperatorContext& ctx, const BoundaryFunction& v,
                        const Candidate& frozen) {
    const MatchingData& md = ctx.matching();
    const int ntc = ctx.params().n_theta_circle;
    std::vector<double> s0(ntc), s2(ntc);
    for (int j = 0; j < ntc; ++j) {
        double th = 2.0 * M_PI * j / ntc;
        s0[j] = varphi_chart(ctx, 0, v.eval(0, th), th).val;
        s2[j] = varphi_chart(ctx, 1, v.eval(1, th), th).val;
    }
    BoundaryFunction tr = bf_from_samples(md, s0, s2, ctx.params().K0,
                                          ctx.params().K2, false, nullptr);
    OperatorContext::Extension xi = ctx.h_L(tr.osc());
    return tr.avg() - xi.trace.avg() - frozen.xi_tilde_trace.avg();
}
}  // namespace

double solve_f(const OperatorContext& ctx, const BoundaryFunction& w, double seed,
               Candidate* out, int max_iter) {
    const MatchingData& md = ctx.matching();
    const double tol = 1e-10 * md.tau2;
    double c = seed;
    double c_prev = 0, F_prev = 0;
    bool have_prev = false;
    Candidate cand;
    bool have_full = false;
    double full_at_c = 0;
    for (int it = 0; it < max_iter; ++it) {
        BoundaryFunction v = w;
        v.a0[0] += c;
        v.a0[1] += c;
        double F;
        if (!have_full) {
            cand = assemble_phi_v(ctx, v);
            have_full = true;
            full_at_c = c;
            F = cand.trace_avg;
        } else {
            F = frozen_trace_avg(ctx, v, cand);
        }
        if (std::abs(F) < tol) {
            if (full_at_c != c) {
                cand = assemble_phi_v(ctx, v);
                full_at_c = c;
                if (std::abs(cand.trace_avg) >= tol) {
                    // frozen model not accurate enough: continue from here
                    F = cand.trace_avg;
                } else {
                    if (out) *out = cand;
                    return c;
                }
            } else {
                if (out) *out = cand;
                return c;
            }
        }
        double slope = -1.0;
        if (have_prev && std::abs(c - c_prev) > 0) {
            double s = (F - F_prev) / (c - c_prev);
            if (std::abs(s) > 0.1) slope = s;
        }
        c_prev = c;
        F_prev = F;
        have_prev = true;
        c -= F / slope;
    }
    throw std::runtime_error("solve_f: Newton did not converge");
}

PhiBoundaryJet phi_boundary_jet(const OperatorContext& ctx, const Candidate& cand,
                                int family, double theta) {
    int f = family;
    Jet2 vv = cand.v.eval_jet(f, theta);
    VarphiChart vc = varphi_chart(ctx, family, vv.f, theta);
    // u = xi + xi~ evaluated on the undisplaced boundary
    CollarJet xu = cand.xi_tilde.collar_jet(family, 0.0, theta);
    // the xi part through its field (exact, not the truncated trace tables)
    CollarJet xi = cand.xi.field.collar_jet(family, 0.0, theta);
    PhiBoundaryJet out;
    out.phi = vc.val - xi.u - xu.u;
    out.phi_z = vc.dZ - xi.uz - xu.uz;  // Z_z = P = 1 at z = 0
    out.phi_t = vv.df * vc.dZ + vc.dT - xi.ut - xu.ut;
    return out;
}

BoundaryFunction nuhat_phi_trace(const OperatorContext& ctx, const Candidate& cand) {
    const MatchingData& md = ctx.matching();
    const int ntc = ctx.params().n_theta_circle;
    std::vector<double> s0(ntc), s2(ntc);
    for (int fi = 0; fi < 2; ++fi) {
        int family = fi;
        double tau = fi == 0 ? md.tau0 : md.tau2;
        std::vector<double>& s = fi == 0 ? s0 : s2;
        for (int j = 0; j < ntc; ++j) {
            double th = 2.0 * M_PI * j / ntc;
            PhiBoundaryJet pj = phi_boundary_jet(ctx, cand, family, th);
            Jet2 vv = cand.v.eval_jet(fi, th);
            double S = std::sin(tau - vv.f);
            double q = vv.df * vv.df + S * S;
            s[j] = tau * (q * pj.phi_z - vv.df * pj.phi_t) / (S * std::sqrt(q));
        }
    }
    return bf_from_samples(md, s0, s2, ctx.params().K0, ctx.params().K2, false,
                           nullptr);
}

BoundaryFunction neumann_N(const OperatorContext& ctx, const BoundaryFunction& w,
                           double f_seed, double* f_out, Candidate* cand_out) {
    Candidate cand;
    double c = solve_f(ctx, w, f_seed, &cand);
    if (f_out) *f_out = c;
    BoundaryFunction nu = nuhat_phi_trace(ctx, cand);
    if (cand_out) *cand_out = cand;
    return nu.ptilde_osc();
}

}  // namespace overdet
