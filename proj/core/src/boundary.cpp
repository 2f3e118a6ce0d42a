#include "overdet/boundary.hpp"

#include <Eigen/SVD>

#include <cstdio>
#include <cstdlib>
#include <cmath>

namespace overdet {

BoundaryFunction BoundaryFunction::zero(const MatchingData& md) {
    BoundaryFunction b;
    b.m = md.config.m;
    b.tau0 = md.tau0;
    b.tau2 = md.tau2;
    return b;
}

bool BoundaryFunction::mode_allowed(int m, int family, int k) {
    if (k <= 0) return false;
    if (family == 0) return k % 2 == 0;
    return k % (2 * m) == 0;
}

void BoundaryFunction::set_mode(int family, int k, double c) {
    if (!mode_allowed(m, family, k))
        throw std::invalid_argument("BoundaryFunction: mode k=" + std::to_string(k) +
                                    " not representable on family " +
                                    std::to_string(family));
    modes[family][k] = c;
}

double BoundaryFunction::mode(int family, int k) const {
    auto it = modes[family].find(k);
    return it == modes[family].end() ? 0.0 : it->second;
}

double BoundaryFunction::avg() const {
    double w0 = measure(0), w2 = measure(1);
    return (w0 * a0[0] + w2 * a0[1]) / (w0 + w2);
}

double BoundaryFunction::cstar() const {
    double w0 = measure(0), w2 = measure(1);
    return (w0 * a0[0] / tau0 + w2 * a0[1] / tau2) / (w0 + w2);
}

BoundaryFunction BoundaryFunction::osc() const {
    BoundaryFunction r = *this;
    double a = avg();
    r.a0[0] -= a;
    r.a0[1] -= a;
    return r;
}

BoundaryFunction BoundaryFunction::ptilde_osc() const {
    BoundaryFunction r = *this;
    double c = cstar();
    r.a0[0] -= c * tau0;
    r.a0[1] -= c * tau2;
    return r;
}

BoundaryFunction BoundaryFunction::low() const {
    BoundaryFunction r = *this;
    r.modes[0].clear();
    r.modes[1].clear();
    return r;
}

BoundaryFunction BoundaryFunction::high() const {
    BoundaryFunction r = *this;
    r.a0[0] = r.a0[1] = 0.0;
    return r;
}

double BoundaryFunction::eval(int family, double theta) const {
    double v = a0[family];
    for (const auto& [k, c] : modes[family]) v += c * std::cos(k * theta);
    return v;
}

Jet2 BoundaryFunction::eval_jet(int family, double theta) const {
    Jet2 j;
    j.f = a0[family];
    for (const auto& [k, c] : modes[family]) {
        double ck = std::cos(k * theta), sk = std::sin(k * theta);
        j.f += c * ck;
        j.df += -c * k * sk;
        j.d2f += -c * k * k * ck;
    }
    return j;
}

double BoundaryFunction::norm() const {
    double worst = 0.0;
    for (int f = 0; f < 2; ++f) {
        int K = 2;
        for (const auto& [k, c] : modes[f]) K = std::max(K, k);
        int n = 4 * K + 8;
        for (int i = 0; i < n; ++i) {
            Jet2 j = eval_jet(f, 2.0 * M_PI * i / n);
            worst = std::max(worst, std::abs(j.f) + std::abs(j.df) + std::abs(j.d2f));
        }
    }
    return worst;
}

double BoundaryFunction::sup_value() const {
    double worst = 0.0;
    for (int f = 0; f < 2; ++f) {
        int K = 2;
        for (const auto& [k, c] : modes[f]) K = std::max(K, k);
        int n = 4 * K + 8;
        for (int i = 0; i < n; ++i)
            worst = std::max(worst, std::abs(eval(f, 2.0 * M_PI * i / n)));
    }
    return worst;
}

void BoundaryFunction::axpy(double a, const BoundaryFunction& o) {
    a0[0] += a * o.a0[0];
    a0[1] += a * o.a0[1];
    for (int f = 0; f < 2; ++f)
        for (const auto& [k, c] : o.modes[f]) modes[f][k] += a * c;
}

void BoundaryFunction::scale(double a) {
    a0[0] *= a;
    a0[1] *= a;
    for (int f = 0; f < 2; ++f)
        for (auto& [k, c] : modes[f]) c *= a;
}

bool BoundaryFunction::is_osc(double tol) const {
    return std::abs(avg()) <= tol * std::max(1.0, norm());
}

BoundaryFunction bf_from_samples(const MatchingData& md,
                                 const std::vector<double>& s0,
                                 const std::vector<double>& s2, int K0, int K2,
                                 bool strict, double* forbidden_ratio) {
    BoundaryFunction out = BoundaryFunction::zero(md);
    double e_tot = 0.0, e_kept = 0.0;
    const std::vector<double>* samp[2] = {&s0, &s2};
    for (int f = 0; f < 2; ++f) {
        const std::vector<double>& s = *samp[f];
        const int n = static_cast<int>(s.size());
        if (n < 8) throw std::invalid_argument("bf_from_samples: too few samples");
        // mean
        std::vector<double> terms(s.begin(), s.end());
        double mean = pairwise_sum(terms) / n;
        out.a0[f] = mean;
        double w = out.measure(f) / n;  // per-sample arc weight
        for (int j = 0; j < n; ++j) e_tot += w * s[j] * s[j];
        e_kept += out.measure(f) * mean * mean;
        int kmax = f == 0 ? K0 : K2;
        for (int k = 1; k <= std::min(kmax, n / 2 - 1); ++k) {
            double ac = 0.0, as = 0.0;
            for (int j = 0; j < n; ++j) {
                double th = 2.0 * M_PI * j / n;
                ac += s[j] * std::cos(k * th);
                as += s[j] * std::sin(k * th);
            }
            ac *= 2.0 / n;
            as *= 2.0 / n;
            if (BoundaryFunction::mode_allowed(md.config.m, f, k)) {
                if (ac != 0.0) out.modes[f][k] = ac;
                // sine content is forbidden by the reflections and stays in
                // the discarded energy below
                e_kept += 0.5 * out.measure(f) * ac * ac;
            }
        }
        // account all sampled energy (truncation + forbidden) via e_tot - e_kept
    }
    double ratio = e_tot > 0 ? std::max(0.0, e_tot - e_kept) / e_tot : 0.0;
    if (forbidden_ratio) *forbidden_ratio = ratio;
    if (strict && ratio > 1e-8)
        throw std::runtime_error("bf_from_samples: forbidden-mode energy ratio " +
                                 std::to_string(ratio));
    return out;
}

double dtn_flat_multiplier(const MatchingData& md, int family, int k) {
    double tau = family == 0 ? md.tau0 : md.tau2;
    return k * tau / std::sin(tau);
}

ExteriorField h_flat(const std::shared_ptr<const DiskGeometry>& geo,
                     const BoundaryFunction& v_high) {
    if (std::abs(v_high.a0[0]) > 0 || std::abs(v_high.a0[1]) > 0)
        throw std::invalid_argument("h_flat: nonzero low part");
    ExteriorField u(geo);
    for (int f = 0; f < 2; ++f)
        for (const auto& [k, c] : v_high.modes[f]) {
            LocalLayer L;
            L.family = f;
            L.k = k;
            L.coeff = c;
            L.kind = ProfileKind::Flat;
            L.flat_tau = geo->tau(f);
            L.banded = false;
            u.layers.push_back(L);
        }
    return u;
}

namespace {
int round_up8(int n) { return ((n + 7) / 8) * 8; }
}  // namespace

OperatorContext::OperatorContext(const MatchingData& md, ContextParams prm)
    : md_(md), prm_(prm) {
    const int m = md.config.m;
    if (prm_.lmax == 0) prm_.lmax = std::max(200, 20 * m);
    if (prm_.K2 < 0) prm_.K2 = (m <= 12) ? 2 * m : 0;
    if (prm_.n_rad_band == 0) prm_.n_rad_band = std::max(48, prm_.lmax / 6);
    // azimuthal content along a band circle is bounded by lmax * band_out
    // plus the source modes
    if (prm_.n_theta_band == 0)
        prm_.n_theta_band = std::max(128, 8 * prm_.lmax / m + 8 * prm_.K0 + 2 * prm_.K2);
    if (prm_.n_theta_circle == 0)
        prm_.n_theta_circle = round_up8(std::max(64, 4 * prm_.K2 + 16));
    geo_ = make_disk_geometry(md_);

    for (int f = 0; f < 2; ++f) {
        double tau = geo_->tau(f);
        collar_r_[f].resize(prm_.n_cheb);
        for (int j = 0; j < prm_.n_cheb; ++j) {
            double x = std::cos(M_PI * (j + 0.5) / prm_.n_cheb);
            collar_r_[f][j] = 1.5 * tau + 0.5 * tau * x;
        }
    }

    basis_.push_back({0, 0});  // balanced low-osc pair
    for (int k = 2; k <= prm_.K0; k += 2) basis_.push_back({0, k});
    if (prm_.K2 >= 2 * m) basis_.push_back({1, 2 * m});

    const int n = n_basis();
    probes_.reserve(n);
    for (const BasisMode& b : basis_) probes_.push_back(make_probe(b));

    O_.resize(n, n);
    for (int j = 0; j < n; ++j) O_.col(j) = osc_coords(probes_[j].trace.osc());
    if (const char* dbg = std::getenv("OVERDET_DEBUG_O"); dbg && dbg[0] == '1') {
        std::fprintf(stderr, "O matrix:\n");
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) std::fprintf(stderr, "% .4e ", O_(i, j));
            std::fprintf(stderr, "\n");
        }
    }
    O_lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(O_);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(O_);
    cond_O_ = svd.singularValues()(0) / svd.singularValues()(n - 1);
    if (cond_O_ > 1e8)
        throw std::runtime_error("OperatorContext: trace system conditioning " +
                                 std::to_string(cond_O_));

    // B R-tilde on the truncated osc basis (probing columns)
    BR_.resize(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        BoundaryFunction Ej = from_osc_coords(e);
        BoundaryFunction v = op_R_tilde(Ej);
        BR_.col(j) = osc_coords(op_B(v));
    }
    br_dev_ = (BR_ - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().rowwise().sum().maxCoeff();
    BR_lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(BR_);

    // driver model: w -> zspace(nuhat H_L w - w)
    BN_.resize(n, n);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        BoundaryFunction w = from_osc_coords(e);
        Extension ext = h_L(w);
        BoundaryFunction d = ext.nuhat;
        d.axpy(-1.0, w);
        BN_.col(j) = zspace_coords(d);
    }
    BN_lu_ = Eigen::PartialPivLU<Eigen::MatrixXd>(BN_);
}

BoundaryFunction OperatorContext::basis_bf(const BasisMode& b) const {
    BoundaryFunction v = BoundaryFunction::zero(md_);
    if (b.k == 0) {
        v.a0[1] = 1.0;
        v.a0[0] = -v.measure(1) / v.measure(0);
    } else {
        v.set_mode(b.family, b.k, 1.0);
    }
    return v;
}

Eigen::VectorXd OperatorContext::osc_coords(const BoundaryFunction& v) const {
    Eigen::VectorXd c(n_basis());
    for (int j = 0; j < n_basis(); ++j) {
        const BasisMode& b = basis_[j];
        c(j) = b.k == 0 ? v.a0[1] : v.mode(b.family, b.k);
    }
    return c;
}

BoundaryFunction OperatorContext::from_osc_coords(const Eigen::VectorXd& c) const {
    BoundaryFunction v = BoundaryFunction::zero(md_);
    for (int j = 0; j < n_basis(); ++j) {
        BoundaryFunction b = basis_bf(basis_[j]);
        v.axpy(c(j), b);
    }
    return v;
}

Eigen::VectorXd OperatorContext::zspace_coords(const BoundaryFunction& f) const {
    Eigen::VectorXd c(n_basis());
    BoundaryFunction chi = basis_bf(basis_[0]);
    double s = chi.a0[0] / md_.tau0 - chi.a0[1] / md_.tau2;
    for (int j = 0; j < n_basis(); ++j) {
        const BasisMode& b = basis_[j];
        if (b.k == 0)
            c(j) = (f.a0[0] / md_.tau0 - f.a0[1] / md_.tau2) / s;
        else
            c(j) = f.mode(b.family, b.k);
    }
    return c;
}

Eigen::VectorXd OperatorContext::bn_solve(const Eigen::VectorXd& rhs) const {
    return BN_lu_.solve(rhs);
}

SpectralField OperatorContext::band_correction(
    const std::vector<LocalLayer>& layers) const {
    const int lmax = prm_.lmax;
    const int m = md_.config.m;
    SpectralField proj = zero_field(lmax, m);
    LegendreTable table(lmax, m);
    std::vector<double> leg;
    const auto& modes = mode_table(lmax, m);
    double src_mass = 0.0;

    for (int f = 0; f < 2; ++f) {
        std::vector<const LocalLayer*> mine;
        for (const LocalLayer& L : layers)
            if (L.family == f && L.banded) mine.push_back(&L);
        if (mine.empty()) continue;
        double bi = geo_->band_in[f], bo = geo_->band_out[f];
        const int nr = prm_.n_rad_band, nt = prm_.n_theta_band;
        // Gauss-Legendre nodes on [bi, bo]
        std::vector<double> gx, gw;
        {
            QuadratureGrid tmp = make_grid(nr - 1, 0, 1);  // reuse GL machinery
            gx = tmp.x;
            gw = tmp.w;
        }
        const DiskFrame& d = geo_->representative(f);
        double orbit = geo_->orbit_size(f);
        for (int ir = 0; ir < nr; ++ir) {
            double r = 0.5 * (bi + bo) + 0.5 * (bo - bi) * gx[ir];
            double wr = 0.5 * (bo - bi) * gw[ir] * std::sin(r);
            Jet2 psi = cutoff_band_jet(bo, bi, r);
            if (psi.df == 0.0 && psi.d2f == 0.0) continue;
            double cotr = std::cos(r) / std::sin(r);
            // per-mode radial residuals of (Delta+2)(psi R cos k theta)
            std::vector<std::pair<int, double>> res;
            for (const LocalLayer* L : mine) {
                Jet2 R = L->bare_jet(r);
                double val =
                    L->coeff * ((psi.d2f + cotr * psi.df) * R.f + 2.0 * psi.df * R.df);
                bool found = false;
                for (auto& pr : res)
                    if (pr.first == L->k) {
                        pr.second += val;
                        found = true;
                    }
                if (!found) res.emplace_back(L->k, val);
            }
            for (int it = 0; it < nt; ++it) {
                double th = 2.0 * M_PI * it / nt;
                double E = 0.0;
                for (const auto& pr : res) E += pr.second * std::cos(pr.first * th);
                if (E == 0.0) continue;
                Vec3 p = std::cos(r) * d.center +
                         std::sin(r) * (std::cos(th) * d.e1 + std::sin(th) * d.e2);
                double beta_x = std::min(1.0, std::max(-1.0, p.z()));
                double lam = std::atan2(p.y(), p.x());
                table.eval(beta_x, leg);
                src_mass += orbit * wr * 2.0 * M_PI / nt * E * E;
                double w = orbit * wr * 2.0 * M_PI / nt * E;
                for (std::size_t idx = 0; idx < modes.size(); ++idx) {
                    int k = modes[idx].k;
                    double norm = 1.0 / std::sqrt(M_PI * (k == 0 ? 2.0 : 1.0));
                    proj.coeffs[idx] += w * leg[idx] * std::cos(k * lam) * norm;
                }
            }
        }
    }
    if (src_mass > 0) {
        double cmass = 0.0;
        for (double c : proj.coeffs) cmass += c * c;
        band_discard_ = std::max(
            band_discard_, std::max(0.0, src_mass - cmass) / src_mass);
    }
    proj.scale(-1.0);
    return solve_L(proj);
}

BoundaryFunction OperatorContext::trace_bf(const ExteriorField& u,
                                           double* forbidden) const {
    const int nt = prm_.n_theta_circle;
    std::vector<double> s0(nt), s2(nt);
    for (int j = 0; j < nt; ++j) {
        double th = 2.0 * M_PI * j / nt;
        s0[j] = u.value(collar_point(*geo_, 0, 0.0, th));
        s2[j] = u.value(collar_point(*geo_, 1, 0.0, th));
    }
    return bf_from_samples(md_, s0, s2, prm_.K0, prm_.K2, false, forbidden);
}

BoundaryFunction OperatorContext::nuhat_trace_bf(const ExteriorField& u) const {
    const int nt = prm_.n_theta_circle;
    std::vector<double> s0(nt), s2(nt);
    for (int j = 0; j < nt; ++j) {
        double th = 2.0 * M_PI * j / nt;
        s0[j] = md_.tau0 * u.collar_jet(0, 0.0, th).uz;
        s2[j] = md_.tau2 * u.collar_jet(1, 0.0, th).uz;
    }
    return bf_from_samples(md_, s0, s2, prm_.K0, prm_.K2, false, nullptr);
}

void OperatorContext::field_jets(const ExteriorField& u,
                                 std::vector<CollarJet> out[2],
                                 double support_factor) const {
    const int nt = prm_.n_theta_collar;
    for (int f = 0; f < 2; ++f) {
        const auto& rs = collar_r_[f];
        double tau = geo_->tau(f);
        out[f].assign(rs.size() * nt, CollarJet{});
        for (std::size_t ir = 0; ir < rs.size(); ++ir) {
            if (support_factor > 0 && rs[ir] > support_factor * tau) continue;
            for (int it = 0; it < nt; ++it)
                out[f][ir * nt + it] =
                    u.collar_jet(f, tau - rs[ir], 2.0 * M_PI * it / nt);
        }
    }
}

OperatorContext::Extension OperatorContext::make_probe(const BasisMode& b) const {
    Extension ext;
    ext.field = ExteriorField(geo_);
    if (b.k == 0) {
        // low extension through Phi2 (exactly L-harmonic)
        BoundaryFunction chi = basis_bf(b);
        ext.field.phi2_coeff = chi.a0[1] / phi2_profile(md_.tau2).f;
    } else if (b.family == 0) {
        LocalLayer L;
        L.family = 0;
        L.k = b.k;
        L.kind = ProfileKind::ExactSingular;
        L.prof = std::make_shared<RadialProfile>(RadialProfile::singular(b.k));
        L.norm = L.prof->eval(geo_->tau(0)).f;
        L.coeff = 1.0;
        L.banded = true;
        ext.field.layers.push_back(L);
        ext.field.corr = band_correction(ext.field.layers);
    } else {
        // Polar high mode: the k-content at polar colatitudes sits beyond any
        // practical spectral truncation, so use the exact two-pole separated
        // solution T_k(pi-r) + T_k(r) instead of a cut-off local layer; no
        // global correction is needed.
        LocalLayer L;
        L.family = 1;
        L.k = b.k;
        L.kind = ProfileKind::ExactPolarPair;
        L.prof2 = std::make_shared<RadialProfile>(RadialProfile::regular(b.k));
        Jet2 a = L.prof2->eval(M_PI - geo_->tau(1));
        Jet2 bb = L.prof2->eval(geo_->tau(1));
        L.norm = a.f + bb.f;
        L.coeff = 1.0;
        L.banded = false;
        L.global_support = true;
        ext.field.layers.push_back(L);
    }
    ext.trace = trace_bf(ext.field);
    ext.nuhat = nuhat_trace_bf(ext.field);
    field_jets(ext.field, ext.jets);
    ext.avg_trace = ext.trace.avg();
    return ext;
}

OperatorContext::Extension OperatorContext::combine(const Eigen::VectorXd& w) const {
    Extension out;
    out.field = ExteriorField(geo_);
    out.trace = BoundaryFunction::zero(md_);
    out.nuhat = BoundaryFunction::zero(md_);
    const int nt = prm_.n_theta_collar;
    for (int f = 0; f < 2; ++f)
        out.jets[f].assign(collar_r_[f].size() * nt, CollarJet{});
    for (int j = 0; j < n_basis(); ++j) {
        if (w(j) == 0.0) continue;
        const Extension& p = probes_[j];
        out.field.axpy(w(j), p.field);
        out.trace.axpy(w(j), p.trace);
        out.nuhat.axpy(w(j), p.nuhat);
        for (int f = 0; f < 2; ++f)
            for (std::size_t i = 0; i < out.jets[f].size(); ++i) {
                const CollarJet& a = p.jets[f][i];
                CollarJet& o = out.jets[f][i];
                o.u += w(j) * a.u;
                o.uz += w(j) * a.uz;
                o.ut += w(j) * a.ut;
                o.uzz += w(j) * a.uzz;
                o.uzt += w(j) * a.uzt;
                o.utt += w(j) * a.utt;
            }
    }
    out.avg_trace = out.trace.avg();
    return out;
}

OperatorContext::Extension OperatorContext::h_L(const BoundaryFunction& v_osc) const {
    if (!v_osc.is_osc(1e-9))
        throw std::invalid_argument("h_L: input must have zero average");
    Eigen::VectorXd rhs = osc_coords(v_osc);
    Eigen::VectorXd w = O_lu_.solve(rhs);
    return combine(w);
}

BoundaryFunction OperatorContext::op_B(const BoundaryFunction& v_osc) const {
    Extension ext = h_L(v_osc);
    BoundaryFunction b = ext.nuhat;
    b.axpy(-1.0, v_osc);
    return b.osc();
}

BoundaryFunction OperatorContext::op_R_tilde(const BoundaryFunction& E_osc) const {
    BoundaryFunction v = BoundaryFunction::zero(md_);
    v.a0[0] = -E_osc.a0[0];
    v.a0[1] = -E_osc.a0[1];
    for (int f = 0; f < 2; ++f)
        for (const auto& [k, c] : E_osc.modes[f])
            v.modes[f][k] = c / (dtn_flat_multiplier(md_, f, k) - 1.0);
    return v;
}

BoundaryFunction OperatorContext::op_R(const BoundaryFunction& E_osc) const {
    if (br_dev_ >= 0.5)
        throw std::runtime_error(
            "op_R: ||B R-tilde - id|| = " + std::to_string(br_dev_) +
            " >= 1/2; contraction hypothesis violated (m too small or "
            "truncation too coarse)");
    Eigen::VectorXd y = BR_lu_.solve(osc_coords(E_osc));
    return op_R_tilde(from_osc_coords(y));
}

OperatorContext::JSolve OperatorContext::j_L(const CollarSource& E, int max_mode0,
                                             int max_mode2) const {
    if (max_mode0 < 0) max_mode0 = prm_.K0;
    if (max_mode2 < 0) max_mode2 = prm_.K2;
    const int m = md_.config.m;
    const int nt = prm_.n_theta_collar;
    const int nr = prm_.n_cheb;
    JSolve out;
    out.field = ExteriorField(geo_);
    for (int f = 0; f < 2; ++f) {
        if (E.vals[f].empty()) continue;
        if (static_cast<int>(E.vals[f].size()) != nr * nt)
            throw std::invalid_argument("j_L: source grid size mismatch");
        int fam = f;
        double tau = geo_->tau(fam);
        int kmax = f == 0 ? max_mode0 : max_mode2;
        std::vector<int> ks{0};
        for (int k = 1; k <= kmax; ++k)
            if (BoundaryFunction::mode_allowed(m, fam, k)) ks.push_back(k);
        // per-node cosine transform
        std::vector<std::vector<double>> ek(ks.size(), std::vector<double>(nr, 0.0));
        double sup_src = 0.0;
        for (int ir = 0; ir < nr; ++ir) {
            for (int it = 0; it < nt; ++it)
                sup_src = std::max(sup_src, std::abs(E.vals[f][ir * nt + it]));
            for (std::size_t ik = 0; ik < ks.size(); ++ik) {
                double acc = 0.0;
                for (int it = 0; it < nt; ++it)
                    acc += E.vals[f][ir * nt + it] *
                           std::cos(ks[ik] * 2.0 * M_PI * it / nt);
                ek[ik][ir] = acc * (ks[ik] == 0 ? 1.0 : 2.0) / nt;
            }
        }
        if (sup_src == 0.0) continue;
        for (std::size_t ik = 0; ik < ks.size(); ++ik) {
            double sup = 0.0;
            for (double v : ek[ik]) sup = std::max(sup, std::abs(v));
            if (sup < 1e-300) continue;
            // radial source in the unhatted equation: divide by tau^2;
            // the collar nodes are exactly the first-kind Chebyshev nodes.
            std::vector<double> node_vals(nr);
            for (int ir = 0; ir < nr; ++ir) node_vals[ir] = ek[ik][ir] / (tau * tau);
            Cheb src = Cheb::fit_values(tau, 2.0 * tau, node_vals);
            std::shared_ptr<ModeOdeSolution> sol;
            if (ks[ik] == 0) {
                sol = std::make_shared<ModeOdeSolution>(ModeOdeSolution::double_zero(
                    0, tau, 2.0 * tau, 2.0 * tau,
                    [&](double r) { return src.eval(r); }, nr));
            } else {
                sol = std::make_shared<ModeOdeSolution>(ModeOdeSolution::bounded(
                    ks[ik], tau, 2.0 * tau, [&](double r) { return src.eval(r); },
                    nr));
            }
            LocalLayer L;
            L.family = fam;
            L.k = ks[ik];
            L.coeff = 1.0;
            L.kind = ProfileKind::Tabulated;
            L.tab = sol;
            if (ks[ik] == 0) {
                L.banded = false;
                L.hard_support = true;
            } else {
                L.banded = true;
            }
            out.field.layers.push_back(L);
        }
    }
    // Band corrections: beyond the source support a bounded mode solution is
    // exactly its singular tail c_S * S_k, so the unit-layer corrections
    // computed for the extension probes can be reused; anything else falls
    // back to a fresh projection.
    {
        std::vector<LocalLayer> leftover;
        for (const LocalLayer& L : out.field.layers) {
            if (!L.banded) continue;
            bool reused = false;
            if (L.family == 0 && L.kind == ProfileKind::Tabulated) {
                for (int j = 0; j < n_basis(); ++j) {
                    if (basis_[j].family == 0 && basis_[j].k == L.k &&
                        !probes_[j].field.corr.empty()) {
                        double snorm =
                            RadialProfile::singular(L.k).eval(geo_->tau(0)).f;
                        double w = L.coeff * L.tab->singular_tail_coeff() * snorm;
                        if (out.field.corr.empty())
                            out.field.corr = zero_field(prm_.lmax, md_.config.m);
                        out.field.corr.axpy(w, probes_[j].field.corr);
                        reused = true;
                        break;
                    }
                }
            }
            if (!reused) leftover.push_back(L);
        }
        if (!leftover.empty()) {
            SpectralField extra = band_correction(leftover);
            if (out.field.corr.empty())
                out.field.corr = extra;
            else
                out.field.corr.axpy(1.0, extra);
        }
    }
    // jets of the fresh part (only where the collar cutoff is active), then
    // the cached probe jets of the trace fix
    field_jets(out.field, out.jets, 1.30);
    // remove the oscillatory trace (EJdef)
    BoundaryFunction t = trace_bf(out.field);
    Eigen::VectorXd wfix = O_lu_.solve(osc_coords(t.osc()));
    Extension fix = combine(wfix);
    out.field.axpy(-1.0, fix.field);
    for (int f = 0; f < 2; ++f)
        for (std::size_t i = 0; i < out.jets[f].size(); ++i) {
            const CollarJet& a = fix.jets[f][i];
            CollarJet& o = out.jets[f][i];
            o.u -= a.u;
            o.uz -= a.uz;
            o.ut -= a.ut;
            o.uzz -= a.uzz;
            o.uzt -= a.uzt;
            o.utt -= a.utt;
        }
    out.trace = trace_bf(out.field);
    out.avg_trace = out.trace.avg();
    return out;
}

}  // namespace overdet
