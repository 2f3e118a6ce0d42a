#pragma once

#include "overdet/field.hpp"

#include <map>

namespace overdet {

/// Per-orbit Fourier data on the boundary circles: one constant and one
/// cosine table per family.  Only symmetry-allowed modes are representable
/// (even k on the equatorial circles, multiples of 2m on the polar ones).
struct BoundaryFunction {
    int m = 0;
    double tau0 = 0, tau2 = 0;
    double a0[2] = {0.0, 0.0};
    std::map<int, double> modes[2];

    static BoundaryFunction zero(const MatchingData& md);
    static bool mode_allowed(int m, int family, int k);
    void set_mode(int family, int k, double c);
    double mode(int family, int k) const;
    double tau(int f) const { return f == 0 ? tau0 : tau2; }
    /// Total length of the family's circles.
    double measure(int f) const {
        return f == 0 ? m * 2.0 * M_PI * std::sin(tau0) : 2.0 * 2.0 * M_PI * std::sin(tau2);
    }

    double avg() const;
    /// Weighted boundary average of f/tau; the overdetermined condition is
    /// f = cstar * tau on the low pair.
    double cstar() const;
    BoundaryFunction osc() const;
    BoundaryFunction ptilde_osc() const;
    BoundaryFunction low() const;
    BoundaryFunction high() const;

    double eval(int family, double theta) const;
    Jet2 eval_jet(int family, double theta) const;  // derivatives in theta
    /// sup over a dense circle grid of |f| + |f'| + |f''|.
    double norm() const;
    double sup_value() const;

    void axpy(double a, const BoundaryFunction& o);
    void scale(double a);
    bool is_osc(double tol = 1e-12) const;
};

/// Fourier analysis of uniform circle samples into allowed modes.  Reports
/// (and in strict mode rejects) energy in symmetry-forbidden modes.
BoundaryFunction bf_from_samples(const MatchingData& md,
                                 const std::vector<double>& samples_family0,
                                 const std::vector<double>& samples_family2, int K0,
                                 int K2, bool strict = true,
                                 double* forbidden_ratio = nullptr);

/// Flat Dirichlet-to-Neumann multiplier k tau_i / sin tau_i (mode k, family i).
double dtn_flat_multiplier(const MatchingData& md, int family, int k);

/// Flat harmonic extension of a high boundary function: (tau_i/r)^k layers.
ExteriorField h_flat(const std::shared_ptr<const DiskGeometry>& geo,
                     const BoundaryFunction& v_high);

struct ContextParams {
    int lmax = 0;            // 0 -> max(200, 20 m)
    int K0 = 8;              // equatorial high-mode truncation
    int K2 = -1;             // -1 -> 2m when m <= 12, else no polar high modes
    int n_rad_band = 0;      // 0 -> max(48, lmax/6)
    int n_theta_band = 0;    // 0 -> max(256, lmax + 1)
    int n_theta_circle = 0;  // 0 -> max(64, 4 K2 + 8) rounded up
    int n_cheb = 48;         // radial collar nodes / ODE representation
    int n_theta_collar = 64;
};

/// Inhomogeneous source for the exterior solve, sampled on the collar node
/// grid (radial Chebyshev nodes on [tau, 2 tau] x uniform angles) per family.
struct CollarSource {
    std::vector<double> vals[2];  // [ir * n_theta + it]
};

/// Assembled linear machinery for one matching configuration: extension
/// probes, the trace exactification system, the right inverse of the
/// shifted Dirichlet-to-Neumann operator, and the collar grids.
class OperatorContext {
  public:
    explicit OperatorContext(const MatchingData& md, ContextParams prm = {});

    const MatchingData& matching() const { return md_; }
    const ContextParams& params() const { return prm_; }
    const std::shared_ptr<const DiskGeometry>& geometry() const { return geo_; }

    struct BasisMode {
        int family = 0;
        int k = 0;  // k = 0 encodes the balanced locally-constant (osc-low) mode
    };
    const std::vector<BasisMode>& basis() const { return basis_; }
    int n_basis() const { return static_cast<int>(basis_.size()); }

    Eigen::VectorXd osc_coords(const BoundaryFunction& v) const;
    BoundaryFunction from_osc_coords(const Eigen::VectorXd& c) const;
    /// Coordinates vanishing exactly on span{tau * 1} + untracked modes; used
    /// by the fixed-point driver (compatible with the modified average).
    Eigen::VectorXd zspace_coords(const BoundaryFunction& f) const;

    /// Exact extension H_L: L u = 0 outside D, (u|dD)_osc = v.  Also returns
    /// the (small) average trace.
    struct Extension {
        ExteriorField field;
        BoundaryFunction trace;
        BoundaryFunction nuhat;              // -tau d/dr of the extension on dD
        std::vector<CollarJet> jets[2];      // on the collar grids
        double avg_trace = 0;
    };
    Extension h_L(const BoundaryFunction& v_osc) const;

    BoundaryFunction op_B(const BoundaryFunction& v_osc) const;
    BoundaryFunction op_R_tilde(const BoundaryFunction& E_osc) const;
    BoundaryFunction op_R(const BoundaryFunction& E_osc) const;
    double br_deviation() const { return br_dev_; }
    double cond_O() const { return cond_O_; }
    /// Worst relative L2 mass lost when projecting the probe band residuals
    /// onto the truncated basis; large values mean lmax cannot resolve the
    /// local layers.
    double band_discard() const { return band_discard_; }

    /// Driver linear model: matrix of w -> zspace_coords(nuhat H_L w - w).
    const Eigen::MatrixXd& bn_matrix() const { return BN_; }
    Eigen::VectorXd bn_solve(const Eigen::VectorXd& rhs) const;

    /// Collar grid nodes (first-kind Chebyshev points of [tau, 2 tau]).
    const std::vector<double>& collar_r(int family) const { return collar_r_[family]; }
    int n_theta_collar() const { return prm_.n_theta_collar; }
    double collar_theta(int it) const {
        return 2.0 * M_PI * it / prm_.n_theta_collar;
    }

    /// L-hat u = E outside D with zero osc trace; E on the collar grids.
    struct JSolve {
        ExteriorField field;
        BoundaryFunction trace;
        // jets on the collar grids, valid on the collar-cutoff support only
        std::vector<CollarJet> jets[2];
        double avg_trace = 0;
    };
    JSolve j_L(const CollarSource& E, int max_mode0 = -1, int max_mode2 = -1) const;

    /// Global spectral correction cancelling the band residuals of `layers`:
    /// solves L corr = -P(residual).
    SpectralField band_correction(const std::vector<LocalLayer>& layers) const;

    /// Boundary trace (and nu-hat trace) of an arbitrary field.
    BoundaryFunction trace_bf(const ExteriorField& u, double* forbidden = nullptr) const;
    BoundaryFunction nuhat_trace_bf(const ExteriorField& u) const;
    /// Collar jets of a field on the context grids.  With a positive
    /// support_factor, only nodes with r <= factor * tau are evaluated (the
    /// remaining jets stay zero); the metric-difference sources vanish
    /// outside the collar cutoff support.
    void field_jets(const ExteriorField& u, std::vector<CollarJet> out[2],
                    double support_factor = -1.0) const;

  private:
    MatchingData md_;
    ContextParams prm_;
    std::shared_ptr<const DiskGeometry> geo_;
    std::vector<BasisMode> basis_;
    std::vector<Extension> probes_;  // H-tilde of each basis mode
    Eigen::MatrixXd O_;
    Eigen::PartialPivLU<Eigen::MatrixXd> O_lu_;
    Eigen::MatrixXd BR_;
    Eigen::PartialPivLU<Eigen::MatrixXd> BR_lu_;
    Eigen::MatrixXd BN_;
    Eigen::PartialPivLU<Eigen::MatrixXd> BN_lu_;
    double br_dev_ = 0, cond_O_ = 0;
    mutable double band_discard_ = 0;
    std::vector<double> collar_r_[2];

    BoundaryFunction basis_bf(const BasisMode& b) const;
    Extension make_probe(const BasisMode& b) const;
    Extension combine(const Eigen::VectorXd& w) const;
};

}  // namespace overdet
