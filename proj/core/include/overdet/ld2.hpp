#pragma once

#include "overdet/geom.hpp"

namespace overdet {

/// Green kernel for Delta + 2 on S^2:
///   G(r) = cos(r) log(2 tan(r/2)) + 1 - cos(r),  r in (0, pi).
/// Returns value and derivative; series branch below r = 1e-4.
std::pair<double, double> green2(double r);

/// Solved singularity strengths for the equator-poles configuration.
struct MatchingData {
    SymmetryConfig config;
    double tau0 = 0;            // disk radius at the equatorial points
    double tau2 = 0;            // disk radius at the poles
    double r = 0;               // tau2 / tau0
    double zeta = 0;            // sqrt(m/2) - (1/4) log m - r
    double phi0_prime_p0 = 0;

    double tau(int family) const { return family == 0 ? tau0 : tau2; }
};

/// Value and tangential gradient of the m-point singular solution
///   Phi0 = (1/2) sum_{q in L0} G(d_q(.)),
/// the unique symmetric solution of (Delta+2)u = 0 off L0 with unit
/// logarithmic strength at each point (even m).
std::pair<double, Vec3> phi0_eval(const SymmetryConfig& config, const Vec3& p);

/// Phi2 = 1 + cos(d_{L2}) log tan(d_{L2}/2), poles removed.
std::pair<double, Vec3> phi2_eval(const Vec3& p);

/// Scalar profile of Phi2 as a function of the distance d to the nearest pole,
/// with first two derivatives in d.
Jet2 phi2_profile(double d);

/// Constant term of Phi0 at p0 relative to log(m d):
///   Phi0'(p0) = 1 - log 2 - log m + (1/2) sum_{q != +-p0} G(d_q(p0)).
double phi0_prime_at_p0(const SymmetryConfig& config);

/// Solve the two matching equations
///   tau0 log(m e^{Phi0'(p0)} tau0) + tau2 = 0,
///   tau0 m/2 + tau2 log(e tau2 / 2)   = 0
/// for tau0, tau2 > 0 (bracketed bisection + Newton on the ratio).
MatchingData solve_matching(const SymmetryConfig& config);

/// varphi = tau0 Phi0 + tau2 Phi2.
std::pair<double, Vec3> varphi_eval(const MatchingData& md, const Vec3& p);

/// Discrete sup of |varphi - tau_i log(d_{L_i}/tau_i)| over sample grids on
/// the annuli A_i = D_{L_i}(2 tau_i) \ D_{L_i}(tau_i/2).
std::pair<double, double> mismatch_residual(const MatchingData& md, int n_radial,
                                            int n_angular);

}  // namespace overdet
