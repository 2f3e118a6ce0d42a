#include "overdet/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace overdet {

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int l = 2; l <= n; ++l) {
                double p2 = ((2.0 * l - 1.0) * t * p1 - (l - 1.0) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::abs(dt) < 1e-15) break;
        }
        x[n - 1 - i] = t;
        w[n - 1 - i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

struct ModeLayout {
    std::vector<Mode> modes;
    std::vector<int> k_values;       // distinct k, ascending
    std::vector<int> k_block_start;  // offset of each k block in modes
    std::vector<int> k_block_len;
};

const ModeLayout& layout(int lmax, int m) {
    static std::map<std::pair<int, int>, ModeLayout> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(lmax, m);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    ModeLayout ml;
    for (int k = 0; k <= lmax; k += m) {
        int start = static_cast<int>(ml.modes.size());
        for (int l = k; l <= lmax; l += 2) ml.modes.push_back({l, k});
        int len = static_cast<int>(ml.modes.size()) - start;
        if (len > 0) {
            ml.k_values.push_back(k);
            ml.k_block_start.push_back(start);
            ml.k_block_len.push_back(len);
        }
        if (m == 0) break;
    }
    return cache.emplace(key, std::move(ml)).first->second;
}

// Orthonormal associated Legendre N_l^k on [-1,1] (integral of square = 1),
// positive (no Condon-Shortley) convention.  Fills f[l] for l = k..lmax, and
// optionally d/dbeta.
void legendre_row(int k, int lmax, double x, double* f, double* db) {
    double s2 = std::max(0.0, 1.0 - x * x);
    double s = std::sqrt(s2);
    // N_k^k
    double nkk = std::sqrt(0.5);
    for (int j = 1; j <= k; ++j) nkk *= std::sqrt((2.0 * j + 1.0) / (2.0 * j)) * s;
    double nl1 = 0.0;  // N_{l-1}^k
    double nl = nkk;   // N_l^k at l = k
    f[k] = nl;
    if (db) {
        // d/dbeta N_l^k = (l x N_l^k - d_l N_{l-1}^k)/sin(beta)
        db[k] = (s > 1e-300) ? (k * x * nl) / s : 0.0;
    }
    for (int l = k + 1; l <= lmax; ++l) {
        double a = std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - static_cast<double>(k) * k));
        double b = (l - 1 > k || l - 1 == k)
                       ? std::sqrt(((l - 1.0) * (l - 1.0) - static_cast<double>(k) * k) /
                                   (4.0 * (l - 1.0) * (l - 1.0) - 1.0))
                       : 0.0;
        double nl2 = a * (x * nl - b * nl1);
        nl1 = nl;
        nl = nl2;
        f[l] = nl;
        if (db) {
            double d = std::sqrt((2.0 * l + 1.0) / (2.0 * l - 1.0) *
                                 (static_cast<double>(l) - k) * (static_cast<double>(l) + k));
            db[l] = (s > 1e-300) ? (l * x * nl - d * nl1) / s : 0.0;
        }
    }
}

}  // namespace

const std::vector<Mode>& mode_table(int lmax, int m) { return layout(lmax, m).modes; }

SpectralField zero_field(int lmax, int m) {
    SpectralField f;
    f.lmax = lmax;
    f.m = m;
    f.coeffs.assign(mode_table(lmax, m).size(), 0.0);
    return f;
}

SpectralField& SpectralField::axpy(double a, const SpectralField& other) {
    if (other.empty()) return *this;
    if (empty()) {
        *this = other;
        scale(a);
        return *this;
    }
    if (lmax != other.lmax || m != other.m)
        throw std::invalid_argument("SpectralField::axpy: layout mismatch");
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += a * other.coeffs[i];
    return *this;
}

SpectralField& SpectralField::scale(double a) {
    for (double& c : coeffs) c *= a;
    return *this;
}

QuadratureGrid make_grid(int lmax, int m, int oversample) {
    if (lmax < 2) throw std::invalid_argument("make_grid: lmax must be >= 2");
    if (oversample < 1) throw std::invalid_argument("make_grid: oversample >= 1");
    QuadratureGrid g;
    g.lmax = lmax;
    g.m = m;
    g.nlat = oversample * (lmax + 1);
    g.nlon = oversample * std::max(2 * lmax + 1, 2 * m + 1);
    gauss_legendre(g.nlat, g.x, g.w);
    return g;
}

namespace {

ProjectionResult project_impl(const QuadratureGrid& g,
                              const std::function<double(int, int)>& sample,
                              int lmax) {
    const ModeLayout& ml = layout(lmax, g.m);
    const int nk = static_cast<int>(ml.k_values.size());
    SpectralField out = zero_field(lmax, g.m);

    // Per-ring longitude transform, then per-k Legendre transform with
    // pairwise-summed ring contributions.
    std::vector<std::vector<double>> contrib(ml.modes.size());
    std::vector<double> ring_e2(g.nlat, 0.0);
    std::vector<double> leg(static_cast<std::size_t>(lmax) + 1);
    std::vector<double> fk(nk);
    std::vector<double> row(g.nlon);
    for (auto& c : contrib) c.resize(g.nlat);

    for (int i = 0; i < g.nlat; ++i) {
        for (int j = 0; j < g.nlon; ++j) row[j] = sample(i, j);
        // energy of the ring
        std::vector<double> sq(g.nlon);
        for (int j = 0; j < g.nlon; ++j) sq[j] = row[j] * row[j];
        ring_e2[i] = pairwise_sum(sq) * g.node_weight(i);
        // cosine transform at the allowed k only
        for (int ik = 0; ik < nk; ++ik) {
            int k = ml.k_values[ik];
            std::vector<double> terms(g.nlon);
            for (int j = 0; j < g.nlon; ++j)
                terms[j] = row[j] * std::cos(k * (2.0 * M_PI * j / g.nlon));
            fk[ik] = pairwise_sum(terms) * 2.0 * M_PI / g.nlon;
        }
        for (int ik = 0; ik < nk; ++ik) {
            int k = ml.k_values[ik];
            legendre_row(k, lmax, g.x[i], leg.data(), nullptr);
            double norm = 1.0 / std::sqrt(M_PI * (k == 0 ? 2.0 : 1.0));
            for (int t = 0; t < ml.k_block_len[ik]; ++t) {
                const Mode& mo = ml.modes[ml.k_block_start[ik] + t];
                contrib[ml.k_block_start[ik] + t][i] = g.w[i] * fk[ik] * leg[mo.l] * norm;
            }
        }
    }
    for (std::size_t idx = 0; idx < ml.modes.size(); ++idx)
        out.coeffs[idx] = pairwise_sum(contrib[idx]);

    double e_tot = pairwise_sum(ring_e2);
    std::vector<double> csq(out.coeffs.size());
    for (std::size_t i = 0; i < csq.size(); ++i) csq[i] = out.coeffs[i] * out.coeffs[i];
    double e_basis = pairwise_sum(csq);
    ProjectionResult res;
    res.field = std::move(out);
    res.discarded_ratio = e_tot > 0 ? std::max(0.0, e_tot - e_basis) / e_tot : 0.0;
    return res;
}

}  // namespace

ProjectionResult project_report(const QuadratureGrid& g,
                                const std::vector<double>& samples, int lmax) {
    if (static_cast<int>(samples.size()) != g.nlat * g.nlon)
        throw std::invalid_argument("project: samples must cover the whole grid");
    return project_impl(
        g, [&](int i, int j) { return samples[static_cast<std::size_t>(i) * g.nlon + j]; },
        lmax);
}

SpectralField project(const QuadratureGrid& g, const std::vector<double>& samples,
                      int lmax) {
    ProjectionResult r = project_report(g, samples, lmax);
    if (r.discarded_ratio > 1e-6)
        throw std::runtime_error(
            "project: discarded-energy ratio " + std::to_string(r.discarded_ratio) +
            " exceeds 1e-6; input is not symmetric or not resolved at this lmax");
    return std::move(r.field);
}

ProjectionResult project_fn(const QuadratureGrid& g,
                            const std::function<double(const Vec3&)>& f, int lmax) {
    return project_impl(g, [&](int i, int j) { return f(g.node(i, j)); }, lmax);
}

SpectralField solve_L(const SpectralField& rhs) {
    const auto& modes = mode_table(rhs.lmax, rhs.m);
    SpectralField u = rhs;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        int l = modes[i].l;
        if (l == 1)
            throw std::invalid_argument("solve_L: l = 1 content is resonant with ker(Delta+2)");
        u.coeffs[i] = rhs.coeffs[i] / (2.0 - static_cast<double>(l) * (l + 1));
    }
    return u;
}

SpectralField apply_L(const SpectralField& f) {
    const auto& modes = mode_table(f.lmax, f.m);
    SpectralField g = f;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        int l = modes[i].l;
        g.coeffs[i] = f.coeffs[i] * (2.0 - static_cast<double>(l) * (l + 1));
    }
    return g;
}

namespace {
void to_geographic(const Vec3& p, double& beta, double& lambda) {
    double z = std::min(1.0, std::max(-1.0, p.z()));
    beta = std::acos(z);
    lambda = std::atan2(p.y(), p.x());
}
}  // namespace

double eval_field(const SpectralField& f, const Vec3& p) {
    if (f.empty()) return 0.0;
    double beta, lam;
    to_geographic(p, beta, lam);
    const ModeLayout& ml = layout(f.lmax, f.m);
    double x = std::cos(beta);
    std::vector<double> leg(static_cast<std::size_t>(f.lmax) + 1);
    double acc = 0.0;
    for (std::size_t ik = 0; ik < ml.k_values.size(); ++ik) {
        int k = ml.k_values[ik];
        legendre_row(k, f.lmax, x, leg.data(), nullptr);
        double block = 0.0;
        for (int t = 0; t < ml.k_block_len[ik]; ++t) {
            const Mode& mo = ml.modes[ml.k_block_start[ik] + t];
            block += f.coeffs[ml.k_block_start[ik] + t] * leg[mo.l];
        }
        acc += block * std::cos(k * lam) / std::sqrt(M_PI * (k == 0 ? 2.0 : 1.0));
    }
    return acc;
}

SphereJet eval_field_jet(const SpectralField& f, double beta, double lambda) {
    SphereJet out;
    if (f.empty()) return out;
    const ModeLayout& ml = layout(f.lmax, f.m);
    double x = std::cos(beta);
    double s = std::sin(beta);
    std::vector<double> leg(static_cast<std::size_t>(f.lmax) + 1);
    std::vector<double> dleg(static_cast<std::size_t>(f.lmax) + 1);
    for (std::size_t ik = 0; ik < ml.k_values.size(); ++ik) {
        int k = ml.k_values[ik];
        legendre_row(k, f.lmax, x, leg.data(), dleg.data());
        double v = 0, vb = 0, vbb = 0;
        for (int t = 0; t < ml.k_block_len[ik]; ++t) {
            const Mode& mo = ml.modes[ml.k_block_start[ik] + t];
            double c = f.coeffs[ml.k_block_start[ik] + t];
            double N = leg[mo.l], Nb = dleg[mo.l];
            // N_bb from the Legendre ODE
            double Nbb = -((s > 1e-300) ? (x / s) : 0.0) * Nb -
                         (static_cast<double>(mo.l) * (mo.l + 1) -
                          (s > 1e-300 ? static_cast<double>(k) * k / (s * s) : 0.0)) *
                             N;
            v += c * N;
            vb += c * Nb;
            vbb += c * Nbb;
        }
        double norm = 1.0 / std::sqrt(M_PI * (k == 0 ? 2.0 : 1.0));
        double ck = std::cos(k * lambda), sk = std::sin(k * lambda);
        out.f += norm * v * ck;
        out.fb += norm * vb * ck;
        out.fl += norm * v * (-k * sk);
        out.fbb += norm * vbb * ck;
        out.fbl += norm * vb * (-k * sk);
        out.fll += norm * v * (-static_cast<double>(k) * k * ck);
    }
    return out;
}

std::pair<double, Vec3> eval_field_grad(const SpectralField& f, const Vec3& p) {
    double beta, lam;
    to_geographic(p, beta, lam);
    SphereJet j = eval_field_jet(f, beta, lam);
    double s = std::sin(beta);
    Vec3 ebeta(std::cos(beta) * std::cos(lam), std::cos(beta) * std::sin(lam),
               -std::sin(beta));
    Vec3 elam(-std::sin(lam), std::cos(lam), 0.0);
    Vec3 grad = Vec3::Zero();
    if (s > 1e-13)
        grad = j.fb * ebeta + (j.fl / s) * elam;
    return {j.f, grad};
}

double inner_product(const SpectralField& a, const SpectralField& b) {
    if (a.lmax != b.lmax || a.m != b.m)
        throw std::invalid_argument("inner_product: layout mismatch");
    std::vector<double> terms(a.coeffs.size());
    for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = a.coeffs[i] * b.coeffs[i];
    return pairwise_sum(terms);
}

LegendreTable::LegendreTable(int lmax, int m) : lmax_(lmax), m_(m) {}

void LegendreTable::eval(double x, std::vector<double>& values) const {
    const ModeLayout& ml = layout(lmax_, m_);
    values.resize(ml.modes.size());
    std::vector<double> leg(static_cast<std::size_t>(lmax_) + 1);
    for (std::size_t ik = 0; ik < ml.k_values.size(); ++ik) {
        int k = ml.k_values[ik];
        legendre_row(k, lmax_, x, leg.data(), nullptr);
        for (int t = 0; t < ml.k_block_len[ik]; ++t)
            values[ml.k_block_start[ik] + t] = leg[ml.modes[ml.k_block_start[ik] + t].l];
    }
}

void LegendreTable::eval_deriv(double x, std::vector<double>& values,
                               std::vector<double>& dbeta) const {
    const ModeLayout& ml = layout(lmax_, m_);
    values.resize(ml.modes.size());
    dbeta.resize(ml.modes.size());
    std::vector<double> leg(static_cast<std::size_t>(lmax_) + 1);
    std::vector<double> dleg(static_cast<std::size_t>(lmax_) + 1);
    for (std::size_t ik = 0; ik < ml.k_values.size(); ++ik) {
        int k = ml.k_values[ik];
        legendre_row(k, lmax_, x, leg.data(), dleg.data());
        for (int t = 0; t < ml.k_block_len[ik]; ++t) {
            values[ml.k_block_start[ik] + t] = leg[ml.modes[ml.k_block_start[ik] + t].l];
            dbeta[ml.k_block_start[ik] + t] = dleg[ml.modes[ml.k_block_start[ik] + t].l];
        }
    }
}

}  // namespace overdet
