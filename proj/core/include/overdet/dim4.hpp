#pragma once

#include "overdet/geom.hpp"

namespace overdet {

/// Green kernel for Delta + 3 on S^3: G(r) = -cos(2r)/sin(r).
/// Symmetric under r -> pi - r; series branch near 0.
std::pair<double, double> green3(double r);

/// Shooting result for the rotational equation
///   phi'' - 2 tan(2z) phi' + 3 phi = 0 on (-pi/4, pi/4),
/// integrated from the regular singular endpoint z = pi/4 with a Frobenius
/// start and normalized phi(0) = 1; F = phi'(0).
struct ShootingResult {
    double F = 0;
    double eps = 0;            // final Frobenius offset used
    std::vector<double> z;     // dense samples, descending from pi/4 - eps
    std::vector<double> phi;   // normalized values
    std::vector<double> dphi;  // normalized derivatives
    double eval(double zq) const;      // cubic Hermite interpolation
    double eval_deriv(double zq) const;
};

ShootingResult shoot_F(double tol = 1e-10);

/// Half-sum singular solution Phi = (1/2) sum_{q in L} G3(d_q(.)) on S^3
/// (even m); pole strength -1 at every lattice point.
double phi3_eval(const SymmetryConfig& config, const Vec4& p);

/// tau = (m^2/(pi F) + Phi'(p0))^{-1} with the closed-form regular part
///   Phi'(p0) = (1/2) sum_{q != +-p0} G3(d_q(p0)) - m^2/(pi F).
struct Tau4Result {
    double tau = 0;
    double phi3_prime_p0 = 0;
    double F = 0;
};
Tau4Result tau4(int m, const ShootingResult& shoot);

}  // namespace overdet
