#pragma once

#include "overdet/boundary.hpp"

namespace overdet {

/// Collar cutoff profile psi(z): 1 near z = 0, supported in |z| < tau/2.
Jet2 collar_psi(double tau, double z);

/// Metric data of g_v in collar coordinates (z, theta) at one point:
/// g_v = (P dz + psi v' dtheta)^2 + sin^2(tau - Z) dtheta^2 with
/// Z = z + psi(z) v(theta), P = 1 + psi'(z) v(theta).
struct CollarMetric {
    double tau = 0;
    double v = 0, vp = 0, vpp = 0;
    double psi = 0, psip = 0, psipp = 0;
    double Z = 0, P = 0, S = 0, C = 0;
    double g_zz = 0, g_zt = 0, g_tt = 0, det = 0;
};

CollarMetric collar_metric(const MatchingData& md, int family,
                           const BoundaryFunction& v, double z, double theta);

/// Delta_{g_v} u from the metric data and a second-order collar jet.
double laplace_gv(const CollarMetric& cm, const CollarJet& u);
/// Round-metric collar Laplacian (v = 0).
double laplace_g0(double tau, double z, const CollarJet& u);

/// exp_p(V_v(p)): geodesic flow toward the nearest singular point by the
/// cutoff-localized amount v(pi(p)).
Vec3 displace(const std::shared_ptr<const DiskGeometry>& geo,
              const BoundaryFunction& v, const Vec3& p);

/// g_v-unit outward normal along the boundary circle, in the chart basis
/// (d_z, d_theta), and its hatted angle with the unperturbed normal.
struct NormalData {
    double nz = 0, ntheta = 0;
    double cos_angle = 1;  // <nu_v, nu>_{g_v,normalized}
};
NormalData normal_vector(const MatchingData& md, int family,
                         const BoundaryFunction& v, double theta);

/// Candidate eigenfunction phi_v = varphi_v - xi_v - xi~_v on S^2 \ D.
struct Candidate {
    BoundaryFunction v;
    BoundaryFunction varphi_trace;       // varphi at the displaced circles
    OperatorContext::Extension xi;       // H_L of the osc part
    ExteriorField xi_tilde;
    BoundaryFunction xi_tilde_trace;
    double trace_avg = 0;                // measured boundary constant
    double trace_osc_sup = 0;
    int neumann_terms = 0;
    double neumann_tail = 0;
};

Candidate assemble_phi_v(const OperatorContext& ctx, const BoundaryFunction& v);

/// Scalar c with phi_{w + c} vanishing on the boundary (Newton with
/// derivative ~ -1, then secant).
double solve_f(const OperatorContext& ctx, const BoundaryFunction& w, double seed,
               Candidate* out = nullptr, int max_iter = 30);

/// Boundary values of phi_v and its first collar derivatives at theta.
struct PhiBoundaryJet {
    double phi = 0, phi_z = 0, phi_t = 0;
};
PhiBoundaryJet phi_boundary_jet(const OperatorContext& ctx, const Candidate& cand,
                                int family, double theta);

/// nu-hat_v phi_v as a boundary function (no projection applied).
BoundaryFunction nuhat_phi_trace(const OperatorContext& ctx, const Candidate& cand);

/// N(w) = modified-osc part of nu-hat_v phi_v with v = w + f(w); the modified
/// average direction is tau * 1 so that N = 0 forces |d phi| constant.
BoundaryFunction neumann_N(const OperatorContext& ctx, const BoundaryFunction& w,
                           double f_seed, double* f_out = nullptr,
                           Candidate* cand_out = nullptr);

/// Source (L-hat - L-hat_v) applied to the cached jets, on the collar grids.
CollarSource metric_difference_source(const OperatorContext& ctx,
                                      const BoundaryFunction& v,
                                      const std::vector<CollarJet> jets[2]);

}  // namespace overdet
