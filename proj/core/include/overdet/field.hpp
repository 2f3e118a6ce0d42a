#pragma once

#include "overdet/ld2.hpp"
#include "overdet/radial.hpp"
#include "overdet/spectral.hpp"

#include <memory>

namespace overdet {

/// Orthonormal tangent frame at a disk center; the local angle theta is
/// measured from e1.  Frames are chosen compatibly with the symmetry group so
/// that per-orbit layers share one coefficient set.
struct DiskFrame {
    Vec3 center, e1, e2;
};

/// Shared geometry of the excised disks: frames per family and the cutoff
/// band radii used by the local layers.  Family indices are 0 (the m
/// equatorial disks) and 1 (the two polar disks).
struct DiskGeometry {
    MatchingData md;
    std::vector<DiskFrame> family0;  // m equatorial disks
    std::vector<DiskFrame> family1;  // the two polar disks
    double band_in[2];               // cutoff == 1 for r <= band region start
    double band_out[2];              // layers vanish for r >= band_out

    double tau(int f) const { return f == 0 ? md.tau0 : md.tau2; }
    const std::vector<DiskFrame>& frames(int f) const {
        return f == 0 ? family0 : family1;
    }
    int orbit_size(int f) const { return f == 0 ? md.config.m : 2; }
    const DiskFrame& representative(int f) const { return frames(f)[0]; }

    /// Local polar coordinates of p about the nearest disk of the family;
    /// returns false if p is farther than band_out from every center.
    bool local_coords(int f, const Vec3& p, double& r, double& theta,
                      int& disk) const;
    bool local_coords_within(int f, const Vec3& p, double radius, double& r,
                             double& theta, int& disk) const;
};

std::shared_ptr<const DiskGeometry> make_disk_geometry(const MatchingData& md);

enum class ProfileKind { Flat, ExactSingular, ExactPolarPair, Tabulated };

/// One symmetric family of local layers: on every disk of `family`, the
/// radial profile times cos(k theta) in the disk's frame, optionally
/// multiplied by the radial band cutoff.
struct LocalLayer {
    int family = 0;
    int k = 0;
    double coeff = 0;
    ProfileKind kind = ProfileKind::ExactSingular;
    std::shared_ptr<const RadialProfile> prof;    // ExactSingular
    std::shared_ptr<const RadialProfile> prof2;   // ExactPolarPair: regular part
    std::shared_ptr<const ModeOdeSolution> tab;   // Tabulated
    double flat_tau = 0;                          // Flat: (flat_tau/r)^k
    double norm = 1.0;                            // profile divided by this
    bool banded = true;
    bool global_support = false;  // exact solution, no band (polar pair)
    bool hard_support = false;  // zero beyond tab->r_hi() (double-zero solves)

    /// Radial factor with cutoff applied; jets in r.
    Jet2 radial_jet(double r, const DiskGeometry& geo) const;
    /// Radial factor without the band cutoff.
    Jet2 bare_jet(double r) const;
};

/// Second-order jet in collar coordinates (z, theta); z is the signed
/// distance from the boundary circle, positive toward the disk center.
struct CollarJet {
    double u = 0, uz = 0, ut = 0, uzz = 0, uzt = 0, utt = 0;
};

/// u = phi2_coeff * Phi2 + spectral correction + symmetric local layers.
/// Represents every exterior field of the linear theory (extensions,
/// inhomogeneous solves, corrections).
class ExteriorField {
  public:
    std::shared_ptr<const DiskGeometry> geo;
    double phi2_coeff = 0;
    SpectralField corr;
    std::vector<LocalLayer> layers;

    explicit ExteriorField(std::shared_ptr<const DiskGeometry> g = nullptr)
        : geo(std::move(g)) {}

    double value(const Vec3& p) const;
    std::pair<double, Vec3> value_grad(const Vec3& p) const;

    /// Jet on the representative collar of the family (z in [-tau/2, tau/2),
    /// theta the frame angle).
    CollarJet collar_jet(int family, double z, double theta) const;

    /// (Delta + 2) u at p, evaluated honestly from the stored representation
    /// (spectral part coefficient-wise; layers through their radial jets).
    double lap_plus2(const Vec3& p) const;

    void axpy(double a, const ExteriorField& other);
    void scale(double a);
};

/// Chart jets of the geographic coordinates (colatitude beta, longitude
/// lambda) of the representative collar chart point x(z,theta).
struct ChartJets {
    double beta = 0, bz = 0, bt = 0, bzz = 0, bzt = 0, btt = 0;
    double lambda = 0, lz = 0, lt = 0, lzz = 0, lzt = 0, ltt = 0;
};
ChartJets collar_chart_jets(const DiskGeometry& geo, int family, double z,
                            double theta);

/// Compose a geographic jet with chart jets.
CollarJet compose_jet(const SphereJet& f, const ChartJets& c);

/// Point on the representative collar chart.
Vec3 collar_point(const DiskGeometry& geo, int family, double z, double theta);

}  // namespace overdet
