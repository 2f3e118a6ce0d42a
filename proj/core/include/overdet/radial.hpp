#pragma once

#include "overdet/geom.hpp"

#include <functional>
#include <vector>

namespace overdet {

/// Separated solutions of (Delta + 2) u = 0 on S^2 for angular mode k:
/// u = R(r) cos(k theta) in geodesic polar coordinates, i.e.
///   R'' + cot(r) R' + (2 - k^2/sin^2 r) R = 0.
/// For k >= 2 both solutions are elementary:
///   singular ~ r^{-k}:  w(t)/sin^k r,  w a degree-(k-2) polynomial in
///                       t = (1-cos r)/2 (hypergeometric, terminating),
///   regular  ~ r^k:     t^k (1 - 2t/(k+1))/sin^k r.
/// For k = 0 the pair is (cos r, G(r)) with G the Green kernel.
class RadialProfile {
  public:
    static RadialProfile singular(int k);
    static RadialProfile regular(int k);

    /// value, d/dr, d2/dr2 (second derivative via the ODE)
    Jet2 eval(double r) const;
    int mode() const { return k_; }

  private:
    RadialProfile(int k, bool singular) : k_(k), singular_(singular) {}
    int k_ = 0;
    bool singular_ = true;
    std::vector<double> poly_;  // coefficients in t
};

/// Wronskian normalization: (T S' - T' S) sin(r) = w0(k).
double radial_wronskian(int k);

/// Chebyshev interpolant on [a,b].
class Cheb {
  public:
    Cheb() = default;
    static Cheb fit(double a, double b, int n, const std::function<double(double)>& f);
    /// Fit from values at the first-kind Chebyshev nodes
    /// r_j = (a+b)/2 + (b-a)/2 cos(pi (j+1/2)/n), j = 0..n-1.
    static Cheb fit_values(double a, double b, const std::vector<double>& values);
    static Cheb from_coeffs(double a, double b, std::vector<double> c);

    double eval(double r) const;
    Jet2 eval_jet(double r) const;
    /// Antiderivative vanishing at the left endpoint a.
    Cheb antiderivative() const;
    double a() const { return a_; }
    double b() const { return b_; }
    const std::vector<double>& coeffs() const { return c_; }

  private:
    double a_ = 0, b_ = 1;
    std::vector<double> c_;
};

/// Particular solution of
///   u'' + cot(r) u' + (2 - k^2/sin^2 r) u = s(r)   on [r_lo, r_hi],
/// via variation of parameters, u = S*A + T*B with
///   A(r) = int_{aT}^r T s sin / w0,   B(r) = -int_{aS}^r S s sin / w0.
/// Base points select the normalization:
///   bounded:     aT = r_lo, aS = r_hi  (pure singular tail beyond r_hi),
///   double-zero: aT = aS = r0          (u = u' = 0 at r0).
class ModeOdeSolution {
  public:
    /// u bounded at both ends; beyond r_hi it continues as c_singular * S(r).
    static ModeOdeSolution bounded(int k, double r_lo, double r_hi,
                                   const std::function<double(double)>& source,
                                   int n_cheb = 64);
    /// u with u(r0) = u'(r0) = 0; identically zero beyond the support side of
    /// r0 if the source vanishes there.
    static ModeOdeSolution double_zero(int k, double r_lo, double r_hi, double r0,
                                       const std::function<double(double)>& source,
                                       int n_cheb = 64);

    /// Jet of u at r; valid on [r_lo, oo) (closed-form tail beyond r_hi).
    Jet2 eval(double r) const;
    double singular_tail_coeff() const { return cs_tail_; }
    int mode() const { return k_; }
    double r_lo() const { return rlo_; }
    double r_hi() const { return rhi_; }

  private:
    int k_ = 0;
    double rlo_ = 0, rhi_ = 0;
    double cs_tail_ = 0, cr_tail_ = 0;
    RadialProfile S_ = RadialProfile::singular(2);
    RadialProfile T_ = RadialProfile::regular(2);
    Cheb A_, B_, src_;
    bool k0_ = false;  // use (cos r, G) pair
    Jet2 eval_S(double r) const;
    Jet2 eval_T(double r) const;
    static ModeOdeSolution build(int k, double r_lo, double r_hi, double aT,
                                 double aS, const std::function<double(double)>& s,
                                 int n_cheb);
};

}  // namespace overdet
