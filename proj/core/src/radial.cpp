#include "overdet/radial.hpp"

#include "overdet/ld2.hpp"

#include <cmath>

namespace overdet {

RadialProfile RadialProfile::singular(int k) {
    if (k == 0) return RadialProfile(0, true);
    if (k < 2) throw std::invalid_argument("RadialProfile: k must be 0 or >= 2");
    RadialProfile p(k, true);
    // 2F1(2-k, -(k+1); 1-k; t), terminating at degree k-2
    double a = 2.0 - k, b = -(k + 1.0), c = 1.0 - k;
    p.poly_.assign(1, 1.0);
    for (int n = 0; n < k - 2; ++n)
        p.poly_.push_back(p.poly_.back() * (a + n) * (b + n) / ((c + n) * (n + 1)));
    return p;
}

RadialProfile RadialProfile::regular(int k) {
    if (k == 0) return RadialProfile(0, false);
    if (k < 2) throw std::invalid_argument("RadialProfile: k must be 0 or >= 2");
    RadialProfile p(k, false);
    // t^k (1 - 2t/(k+1)): store as dense polynomial in t
    p.poly_.assign(k + 2, 0.0);
    p.poly_[k] = 1.0;
    p.poly_[k + 1] = -2.0 / (k + 1.0);
    return p;
}

Jet2 RadialProfile::eval(double r) const {
    if (k_ == 0) {
        Jet2 j;
        if (singular_) {
            auto [g, dg] = green2(r);
            j.f = g;
            j.df = dg;
        } else {
            j.f = std::cos(r);
            j.df = -std::sin(r);
        }
        j.d2f = -std::cos(r) / std::sin(r) * j.df - 2.0 * j.f;
        return j;
    }
    double s = std::sin(r), c = std::cos(r);
    double t = 0.5 * (1.0 - c);
    // Horner for w, w', w'' in t
    double w = 0, w1 = 0, w2 = 0;
    for (int i = static_cast<int>(poly_.size()) - 1; i >= 0; --i) {
        w2 = w2 * t + 2.0 * w1;
        w1 = w1 * t + w;
        w = w * t + poly_[i];
    }
    double tp = 0.5 * s, tpp = 0.5 * c;  // dt/dr, d2t/dr2
    double sk = std::pow(s, -k_);
    double f = w * sk;
    // d/dr [w(t) sin^{-k}] = w' t' s^{-k} - k w c s^{-k-1}
    double df = w1 * tp * sk - k_ * w * c * sk / s;
    Jet2 j;
    j.f = f;
    j.df = df;
    // second derivative from the ODE would be circular here; differentiate directly:
    // d2 = [w'' t'^2 + w' t''] s^{-k} - 2k w' t' c s^{-k-1}
    //      - k w (-s) s^{-k-1} - k w c * (-(k+1)) c s^{-k-2}
    j.d2f = (w2 * tp * tp + w1 * tpp) * sk - 2.0 * k_ * w1 * tp * c * sk / s +
            k_ * w * sk + k_ * (k_ + 1.0) * w * c * c * sk / (s * s);
    return j;
}

double radial_wronskian(int k) {
    if (k == 0) return 1.0;
    return -2.0 * k / std::pow(4.0, k);
}

Cheb Cheb::fit(double a, double b, int n, const std::function<double(double)>& f) {
    std::vector<double> fx(n);
    for (int j = 0; j < n; ++j) {
        double x = std::cos(M_PI * (j + 0.5) / n);
        fx[j] = f(0.5 * (a + b) + 0.5 * (b - a) * x);
    }
    return fit_values(a, b, fx);
}

Cheb Cheb::fit_values(double a, double b, const std::vector<double>& fx) {
    Cheb ch;
    ch.a_ = a;
    ch.b_ = b;
    const int n = static_cast<int>(fx.size());
    ch.c_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += fx[j] * std::cos(i * M_PI * (j + 0.5) / n);
        ch.c_[i] = 2.0 / n * acc;
    }
    ch.c_[0] *= 0.5;
    return ch;
}

Cheb Cheb::from_coeffs(double a, double b, std::vector<double> c) {
    Cheb ch;
    ch.a_ = a;
    ch.b_ = b;
    ch.c_ = std::move(c);
    return ch;
}

double Cheb::eval(double r) const {
    if (c_.empty()) return 0.0;
    double x = (2.0 * r - a_ - b_) / (b_ - a_);
    double b1 = 0, b2 = 0;
    for (int i = static_cast<int>(c_.size()) - 1; i >= 1; --i) {
        double t = 2.0 * x * b1 - b2 + c_[i];
        b2 = b1;
        b1 = t;
    }
    return x * b1 - b2 + c_[0];
}

Jet2 Cheb::eval_jet(double r) const {
    Jet2 j;
    if (c_.empty()) return j;
    const int n = static_cast<int>(c_.size());
    double x = (2.0 * r - a_ - b_) / (b_ - a_);
    // Clenshaw for value and two derivative series (derivatives of T_n via
    // recurrence on the coefficient level)
    std::vector<double> d1(n, 0.0), d2(n, 0.0);
    // derivative coefficients: if f = sum c_i T_i, f' = sum d_i T_i with
    // d_{i-1} = d_{i+1} + 2 i c_i (d_n = d_{n+1} = 0), and c'_0 halved.
    {
        std::vector<double> d(n + 2, 0.0);
        for (int i = n - 1; i >= 1; --i) d[i - 1] = d[i + 1] + 2.0 * i * c_[i];
        d[0] *= 0.5;
        for (int i = 0; i < n; ++i) d1[i] = d[i];
        std::vector<double> e(n + 2, 0.0);
        for (int i = n - 1; i >= 1; --i) e[i - 1] = e[i + 1] + 2.0 * i * d1[i];
        e[0] *= 0.5;
        for (int i = 0; i < n; ++i) d2[i] = e[i];
    }
    auto clenshaw = [&](const std::vector<double>& c) {
        double b1 = 0, b2 = 0;
        for (int i = static_cast<int>(c.size()) - 1; i >= 1; --i) {
            double t = 2.0 * x * b1 - b2 + c[i];
            b2 = b1;
            b1 = t;
        }
        return x * b1 - b2 + c[0];
    };
    double sx = 2.0 / (b_ - a_);
    j.f = clenshaw(c_);
    j.df = clenshaw(d1) * sx;
    j.d2f = clenshaw(d2) * sx * sx;
    return j;
}

Cheb Cheb::antiderivative() const {
    const int n = static_cast<int>(c_.size());
    std::vector<double> ci(n + 1, 0.0);
    double half = 0.5 * (b_ - a_);
    // C_i = (c_{i-1} - c_{i+1})/(2i) with the stored c_0 counted twice
    for (int i = 1; i < n - 1; ++i) {
        double prev = (i == 1) ? 2.0 * c_[0] : c_[i - 1];
        ci[i] = half * (prev - c_[i + 1]) / (2.0 * i);
    }
    if (n >= 2) ci[n - 1] = half * ((n - 1 == 1 ? 2.0 : 1.0) * c_[n - 2]) / (2.0 * (n - 1));
    if (n >= 1) ci[n] = half * c_[n - 1] / (2.0 * n);
    // adjust constant so value at a (x=-1) is zero: T_i(-1) = (-1)^i
    double at_a = 0.0;
    for (int i = 1; i <= n; ++i) at_a += ci[i] * (i % 2 == 0 ? 1.0 : -1.0);
    ci[0] = -at_a;
    Cheb out;
    out.a_ = a_;
    out.b_ = b_;
    out.c_ = std::move(ci);
    return out;
}

ModeOdeSolution ModeOdeSolution::build(int k, double r_lo, double r_hi, double aT,
                                       double aS,
                                       const std::function<double(double)>& s,
                                       int n_cheb) {
    ModeOdeSolution sol;
    sol.k_ = k;
    sol.k0_ = (k == 0);
    sol.rlo_ = r_lo;
    sol.rhi_ = r_hi;
    sol.S_ = RadialProfile::singular(k);
    sol.T_ = RadialProfile::regular(k);
    sol.src_ = Cheb::fit(r_lo, r_hi, n_cheb, s);
    const double w0 = radial_wronskian(k);
    Cheb ts = Cheb::fit(r_lo, r_hi, n_cheb, [&](double r) {
        return sol.eval_T(r).f * sol.src_.eval(r) * std::sin(r) / w0;
    });
    Cheb ss = Cheb::fit(r_lo, r_hi, n_cheb, [&](double r) {
        return sol.eval_S(r).f * sol.src_.eval(r) * std::sin(r) / w0;
    });
    Cheb TS = ts.antiderivative();  // from r_lo
    Cheb SS = ss.antiderivative();
    double shiftA = TS.eval(aT);
    double shiftB = SS.eval(aS);
    // A(r) = TS(r) - TS(aT); B(r) = -(SS(r) - SS(aS))
    std::vector<double> ac = TS.coeffs();
    ac[0] -= shiftA;
    std::vector<double> bc = SS.coeffs();
    for (double& c : bc) c = -c;
    bc[0] += shiftB;
    sol.A_ = Cheb::from_coeffs(r_lo, r_hi, std::move(ac));
    sol.B_ = Cheb::from_coeffs(r_lo, r_hi, std::move(bc));
    sol.cs_tail_ = sol.A_.eval(r_hi);
    sol.cr_tail_ = sol.B_.eval(r_hi);
    return sol;
}

ModeOdeSolution ModeOdeSolution::bounded(int k, double r_lo, double r_hi,
                                         const std::function<double(double)>& s,
                                         int n_cheb) {
    return build(k, r_lo, r_hi, r_lo, r_hi, s, n_cheb);
}

ModeOdeSolution ModeOdeSolution::double_zero(int k, double r_lo, double r_hi,
                                             double r0,
                                             const std::function<double(double)>& s,
                                             int n_cheb) {
    return build(k, r_lo, r_hi, r0, r0, s, n_cheb);
}

Jet2 ModeOdeSolution::eval_S(double r) const { return S_.eval(r); }
Jet2 ModeOdeSolution::eval_T(double r) const { return T_.eval(r); }

Jet2 ModeOdeSolution::eval(double r) const {
    Jet2 S = eval_S(r), T = eval_T(r);
    double A, B, src = 0.0;
    if (r >= rhi_) {
        A = cs_tail_;
        B = cr_tail_;
    } else {
        A = A_.eval(r);
        B = B_.eval(r);
        src = src_.eval(r);
    }
    Jet2 u;
    u.f = S.f * A + T.f * B;
    u.df = S.df * A + T.df * B;  // the A', B' terms cancel by construction
    // u'' from the ODE: u'' = src - cot r u' - (2 - k^2/sin^2 r) u
    double cr = std::cos(r) / std::sin(r);
    double q = 2.0 - static_cast<double>(k_) * k_ / (std::sin(r) * std::sin(r));
    u.d2f = src - cr * u.df - q * u.f;
    return u;
}

}  // namespace overdet
