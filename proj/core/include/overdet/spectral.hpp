#pragma once

#include "overdet/geom.hpp"

#include <vector>

namespace overdet {

/// Gauss-Legendre colatitude nodes x uniform longitudes.  Integrates
/// spherical polynomials of degree <= 2*lmax exactly; total weight 4*pi.
struct QuadratureGrid {
    int lmax = 0;
    int m = 0;
    int nlat = 0;
    int nlon = 0;
    std::vector<double> x;   // cos(colatitude), GL nodes
    std::vector<double> w;   // GL weights, sum = 2

    double node_weight(int i) const { return w[i] * 2.0 * M_PI / nlon; }
    Vec3 node(int i, int j) const {
        double s = std::sqrt(std::max(0.0, 1.0 - x[i] * x[i]));
        double lam = 2.0 * M_PI * j / nlon;
        return Vec3(s * std::cos(lam), s * std::sin(lam), x[i]);
    }
};

QuadratureGrid make_grid(int lmax, int m, int oversample = 1);

/// Truncated coefficient table over the symmetric real harmonic basis
/// Y_{l,k} = N_l^k(cos b) cos(k lam) / sqrt(pi (1+delta_{k0})),
/// k in {0, m, 2m, ...}, k <= l <= lmax, l+k even.  The l = 1 block is empty
/// by construction (parity), so Delta + 2 is invertible on this span.
struct SpectralField {
    int lmax = 0;
    int m = 0;
    std::vector<double> coeffs;  // ordered per mode_table(lmax, m)

    bool empty() const { return coeffs.empty(); }
    SpectralField& axpy(double a, const SpectralField& other);
    SpectralField& scale(double a);
};

struct Mode {
    int l = 0, k = 0;
};

/// Shared mode ordering for (lmax, m): for each k = 0, m, 2m, ... the degrees
/// l = k, k+2, ..., <= lmax.
const std::vector<Mode>& mode_table(int lmax, int m);

SpectralField zero_field(int lmax, int m);

struct ProjectionResult {
    SpectralField field;
    double discarded_ratio = 0.0;  // energy outside the symmetric basis / total
};

/// Discrete projection of grid samples (row-major [ilat][ilon]) onto the
/// symmetric basis.  Throws if the discarded-energy ratio exceeds 1e-6
/// (non-symmetric or under-resolved input).
SpectralField project(const QuadratureGrid& g, const std::vector<double>& samples,
                      int lmax);
ProjectionResult project_report(const QuadratureGrid& g,
                                const std::vector<double>& samples, int lmax);
ProjectionResult project_fn(const QuadratureGrid& g,
                            const std::function<double(const Vec3&)>& f, int lmax);

/// Coefficient-wise solve of (Delta + 2) u = f:  u_{l,k} = f_{l,k}/(2-l(l+1)).
SpectralField solve_L(const SpectralField& rhs);

/// Coefficient-wise application of (Delta + 2).
SpectralField apply_L(const SpectralField& f);

double eval_field(const SpectralField& f, const Vec3& p);
/// Value and tangential gradient (3-vector orthogonal to p).
std::pair<double, Vec3> eval_field_grad(const SpectralField& f, const Vec3& p);

/// Full second-order jet in geographic coordinates (colatitude b, longitude
/// lam): f, f_b, f_lam, f_bb, f_blam, f_lamlam.
struct SphereJet {
    double f = 0, fb = 0, fl = 0, fbb = 0, fbl = 0, fll = 0;
};
SphereJet eval_field_jet(const SpectralField& f, double beta, double lambda);

double inner_product(const SpectralField& a, const SpectralField& b);

/// Workspace evaluating all basis functions N_l^k(x) for the (lmax, m) mode
/// set at one x = cos(colatitude); used by projection/evaluation and by the
/// local annulus quadratures.
class LegendreTable {
  public:
    LegendreTable(int lmax, int m);
    // values[i] = N_{l_i}^{k_i}(x) aligned with mode_table(lmax, m)
    void eval(double x, std::vector<double>& values) const;
    // also derivative d/dbeta at beta = acos(x)
    void eval_deriv(double x, std::vector<double>& values,
                    std::vector<double>& dbeta) const;
    int lmax() const { return lmax_; }
    int m() const { return m_; }

  private:
    int lmax_, m_;
};

}  // namespace overdet
