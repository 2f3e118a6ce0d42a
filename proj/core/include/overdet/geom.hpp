#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

namespace overdet {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Symmetric singular-point configuration on S^2 (equatorial m-gon plus the
/// two poles) or on S^3 (the m x m lattice on the Clifford torus), together
/// with the generators of its symmetry group.
struct SymmetryConfig {
    int m = 0;
    int dimension = 2;           // sphere dimension: 2 or 3
    double delta = 0.0;          // 1/(10 m)

    // dimension == 2
    std::vector<Vec3> L0;        // equatorial m-gon
    std::vector<Vec3> L2;        // { +e3, -e3 }
    Vec3 p0 = Vec3::Zero();
    Vec3 p2 = Vec3::Zero();
    std::vector<Mat3> generators3;

    // dimension == 3
    std::vector<Vec4> L;         // m^2 lattice points
    Vec4 q0 = Vec4::Zero();      // base point (1,0,1,0)/sqrt(2)
    std::vector<Mat4> generators4;
};

/// Build the configuration for even m >= 4.  Rejects odd m: the closed-form
/// half-sum construction of the singular solutions needs -L = L.
SymmetryConfig build_config(int m, int dimension);

double geodesic_distance(const Vec3& p, const Vec3& q);
double geodesic_distance(const Vec4& p, const Vec4& q);

/// Minimum geodesic distance to a finite point set and the argmin index
/// (ties broken by lowest index).
std::pair<double, int> dist_to_set(const Vec3& p, const std::vector<Vec3>& set);
std::pair<double, int> dist_to_set(const Vec4& p, const std::vector<Vec4>& set);

/// Value and first two derivatives of a scalar profile.
struct Jet2 {
    double f = 0, df = 0, d2f = 0;
};

/// The fixed transition profile: smooth, nondecreasing, 0 on (-inf,-1],
/// 1 on [1,inf), and psi - 1/2 odd.  Realized by the exp(-1/x) partition.
Jet2 smooth_step(double s);

/// cutoff(a,b,t): 0 near a, 1 near b, transition in the middle third of [a,b].
double cutoff(double a, double b, double t);
Jet2 cutoff_jet(double a, double b, double t);

/// Same contract, realized by an erf profile with Gaussian edge contact
/// instead of the exponential partition: spectrally far better conditioned,
/// used for the cutoffs whose residuals feed the global spectral solves.
double cutoff_band(double a, double b, double t);
Jet2 cutoff_band_jet(double a, double b, double t);

/// Max over seeded random sample points and group generators of
/// |f(gamma p) - f(p)|.
double check_symmetric(const std::function<double(const Vec3&)>& field,
                       const SymmetryConfig& config, int samples, unsigned seed = 0);
double check_symmetric4(const std::function<double(const Vec4&)>& field,
                        const SymmetryConfig& config, int samples, unsigned seed = 0);

/// Fixed-order pairwise (binary-tree) summation; deterministic independent of
/// any parallel partitioning of the work that produced the terms.
double pairwise_sum(const double* data, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

}  // namespace overdet
