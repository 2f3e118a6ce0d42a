#pragma once

#include "overdet/driver.hpp"

#include <string>

namespace overdet {

/// Versioned on-disk description of a constructed domain (JSON, 17
/// significant digits, lossless round trip).
struct DomainFileV1 {
    int schema_version = 1;
    int m = 0;
    int dimension = 2;
    int lmax = 0;
    int K0 = 8;
    double tau0 = 0, tau2 = 0, zeta = 0, phi0p = 0;
    double f_const = 0;
    BoundaryFunction v;
    // verification summary
    double grad_variation = 0, positivity_min = 0, trace_sup = 0, n_norm = 0;
    int iterations = 0;
    bool converged = false;
};

DomainFileV1 make_domain_file(const FixedPointResult& r, int lmax, int K0);
void save_domain_file(const DomainFileV1& df, const std::string& path);
DomainFileV1 load_domain_file(const std::string& path);

/// 17-significant-digit decimal representation (round-trip exact).
std::string fmt17(double x);

}  // namespace overdet
