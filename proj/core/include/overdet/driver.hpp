#pragma once

#include "overdet/perturb.hpp"

#include <string>

namespace overdet {

struct VerificationReport {
    int m = 0;
    int boundary_components = 0;
    double grad_min = 0, grad_max = 0;
    double grad_variation = 0;  // max/min - 1
    double positivity_min = 0;
    double pde_residual = 0;       // sup |L-hat_v phi_v| at collar collocation
    double pde_residual_far = 0;   // sup |(Delta+2) phi| away from the collar
    double trace_sup = 0;          // sup |phi| on the boundary
    double symmetry_dev = 0;
    double n_norm = 0;             // final ||N|| (sup)
    double v_inf = 0;
    double f_const = 0;
    std::vector<double> history;   // ||w_{n+1} - w_n||
    bool converged = false;
    int iterations = 0;
    double wall_time_s = 0;
};

struct FixedPointParams {
    int lmax = 0;          // 0 -> default
    int K0 = 8;
    int K2 = -1;
    double tol = 1e-6;     // stop at ||J(w) - w|| < tol * tau2^{5/2}
    int max_iter = 40;
    unsigned seed = 0;
    int verify_samples = 256;
    bool run_verification = true;
};

struct FixedPointResult {
    MatchingData md;
    BoundaryFunction v;    // full boundary perturbation (includes the constant)
    double f_const = 0;
    double w0_norm = 0, w_norm = 0;
    VerificationReport report;
};

/// The fixed-point construction: iterate w <- J(w) from w = 0 with
/// J(w) = -R(N(w0 + w) - N(0) - B(w0 + w)), w0 = -R N(0), on the truncated
/// mode basis; then v = w0 + w + f(w0 + w).
FixedPointResult fixed_point(int m, const FixedPointParams& prm = {});

/// Independent verification of the overdetermined conditions for a stored v.
VerificationReport verify_domain(const OperatorContext& ctx,
                                 const BoundaryFunction& v, int samples,
                                 unsigned seed);

struct SweepRow {
    int m = 0;
    double tau0 = 0, tau2 = 0, ratio = 0, zeta = 0;
    double v_inf = 0, grad_variation = 0;
    int iterations = 0;
    double wall_time_s = 0;
    std::string error;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double slope = 0;  // log-log slope of ||v||_inf vs tau2 over converged rows
};

SweepResult sweep(const std::vector<int>& ms, const FixedPointParams& prm = {});

}  // namespace overdet
